#include <gtest/gtest.h>

#include <sstream>

#include "lrmr/errors.hpp"
#include "lrmr/matcore.hpp"
#include "oracles.hpp"

namespace lrmr {
namespace {

using oracle::gaussian;
using oracle::random_orthogonal;

double rel(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).norm() / b.norm(); }

TEST(Svd, IdentityHasUnitSingularValues) {
  const SvdFactors f = svd(DenseMatrix::Identity(2, 2));
  EXPECT_NEAR(f.sigma(0), 1.0, 1e-15);
  EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
}

TEST(Svd, RankOneDiagonal) {
  DenseMatrix X = DenseMatrix::Zero(2, 2);
  X(0, 0) = 3.0;
  const SvdFactors f = svd(X);
  EXPECT_NEAR(f.sigma(0), 3.0, 1e-15);
  EXPECT_EQ(f.sigma(1), 0.0);
}

TEST(Svd, RecomposesAndMatchesGramEigenvalues) {
  Rng rng(11);
  for (auto [n, p] : {std::pair{5, 4}, std::pair{4, 5}, std::pair{7, 7}, std::pair{1, 6}}) {
    const DenseMatrix X = gaussian(n, p, rng);
    const SvdFactors f = svd(X);
    const Index q = std::min(n, p);
    ASSERT_EQ(f.sigma.size(), q);
    EXPECT_LT(rel(f.recompose(), X), 1e-10);
    const double tol = 1e-10 * std::max(n, p);
    EXPECT_LT((f.U.transpose() * f.U - DenseMatrix::Identity(q, q)).norm(), tol);
    EXPECT_LT((f.V.transpose() * f.V - DenseMatrix::Identity(q, q)).norm(), tol);
    for (Index i = 1; i < q; ++i) EXPECT_GE(f.sigma(i - 1), f.sigma(i));
    const Vector oracle = oracle::gram_singular_values(X);
    EXPECT_LT((f.sigma.cwiseAbs2() - oracle.cwiseAbs2()).norm(), 1e-10 * X.squaredNorm());
  }
}

TEST(Svd, SignConventionIsDeterministic) {
  Rng rng(3);
  const DenseMatrix X = gaussian(6, 4, rng);
  const SvdFactors a = svd(X);
  const SvdFactors b = svd(X);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.V, b.V);
  for (Index j = 0; j < a.U.cols(); ++j) {
    Index arg = 0;
    a.U.col(j).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(a.U(arg, j), 0.0);
  }
  // Flipping the input sign flips V but leaves U's convention intact.
  const SvdFactors c = svd(-X);
  EXPECT_LT((c.U - a.U).norm(), 1e-10);
}

TEST(Svd, IllConditionedInputStillRecomposes) {
  Rng rng(5);
  const DenseMatrix P = random_orthogonal(12, rng);
  const DenseMatrix Q = random_orthogonal(12, rng);
  Vector s(12);
  for (Index i = 0; i < 12; ++i) s(i) = std::pow(10.0, -8.0 * i / 11.0);
  const DenseMatrix X = P * s.asDiagonal() * Q.transpose();
  EXPECT_LT(rel(svd(X).recompose(), X), 1e-10);
}

TEST(Svd, RejectsNonFinite) {
  DenseMatrix X = DenseMatrix::Ones(2, 2);
  X(1, 0) = std::nan("");
  EXPECT_THROW(svd(X), InvalidInput);
}

TEST(PartialSvd, MatchesLeadingTriplets) {
  Rng rng(8);
  // Decaying spectrum so the block iteration converges quickly.
  const DenseMatrix P = random_orthogonal(300, rng);
  const DenseMatrix Q = random_orthogonal(300, rng);
  Vector s(300);
  for (Index i = 0; i < 300; ++i) s(i) = 100.0 * std::pow(0.8, static_cast<double>(i));
  const DenseMatrix X = P * s.asDiagonal() * Q.transpose();
  const SvdFactors f = partial_svd(X, 10);
  ASSERT_EQ(f.sigma.size(), 10);
  for (Index i = 0; i < 10; ++i) EXPECT_NEAR(f.sigma(i), s(i), 1e-8 * s(0));
  EXPECT_LT((X * f.V - f.U * f.sigma.asDiagonal()).norm(), 1e-8 * s(0));
}

TEST(TruncateK, ZeroesTrailingValues) {
  DenseMatrix X = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  const DenseMatrix T = truncate_k(svd(X), 2);
  DenseMatrix expected = DenseMatrix::Zero(3, 3);
  expected(0, 0) = 3.0;
  expected(1, 1) = 2.0;
  EXPECT_LT((T - expected).norm(), 1e-14);
}

TEST(TruncateK, ZeroRankGivesZeroMatrix) {
  Rng rng(1);
  EXPECT_EQ(truncate_k(svd(gaussian(4, 6, rng)), 0).norm(), 0.0);
}

TEST(TruncateK, TailSumOracleAndFullReconstruction) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix X = gaussian(5, 7, rng);
    const SvdFactors f = svd(X);
    const double tail = f.sigma.tail(4).sum();
    EXPECT_NEAR(nuclear_norm(X - truncate_k(f, 1)), tail, 1e-10 * tail);
    EXPECT_LT(rel(truncate_k(f, 5), X), 1e-10);
  }
}

TEST(TruncateK, RejectsOutOfRange) {
  const SvdFactors f = svd(DenseMatrix::Identity(3, 3));
  EXPECT_THROW(truncate_k(f, 4), InvalidArgument);
  EXPECT_THROW(truncate_k(f, -1), InvalidArgument);
}

TEST(EpsStabilize, Examples) {
  Vector s(2);
  s << 3.0, 0.5;
  EXPECT_EQ(eps_stabilize(s, 1.0), (Vector(2) << 3.0, 1.0).finished());
  EXPECT_EQ(eps_stabilize(s, 0.0), s);
  EXPECT_EQ(eps_stabilize(Vector::Zero(2), 0.2), Vector::Constant(2, 0.2));
  EXPECT_THROW(eps_stabilize(s, -1e-3), InvalidArgument);
}

TEST(SchattenNorm, Examples) {
  const DenseMatrix D = Vector::LinSpaced(3, 1.0, 3.0).asDiagonal();
  EXPECT_NEAR(schatten_norm(D, 1.0), 6.0, 1e-14);
  Rng rng(4);
  const DenseMatrix Q = random_orthogonal(6, rng);
  EXPECT_NEAR(schatten_norm(Q, 1.0), 6.0, 1e-12);
  EXPECT_NEAR(schatten_norm(Q, kInfinity), 1.0, 1e-12);
  const DenseMatrix X = gaussian(5, 8, rng);
  EXPECT_NEAR(schatten_norm(X, 2.0), std::sqrt(X.array().square().sum()), 1e-10 * X.norm());
  EXPECT_THROW(schatten_norm(X, 0.5), InvalidArgument);
}

TEST(SchattenNorm, UnitarilyInvariant) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix X = gaussian(5, 7, rng);
    const DenseMatrix Y = random_orthogonal(5, rng) * X * random_orthogonal(7, rng);
    for (double q : {1.0, 1.5, 2.0, 3.0, kInfinity}) {
      const double a = schatten_norm(X, q);
      EXPECT_NEAR(schatten_norm(Y, q), a, 1e-10 * a) << "q = " << q;
    }
  }
}

TEST(BestKError, Examples) {
  const DenseMatrix D = Vector::LinSpaced(3, 3.0, 1.0).asDiagonal();
  EXPECT_NEAR(best_k_error(D, 1), 3.0, 1e-14);
  Rng rng(9);
  const DenseMatrix L = gaussian(6, 2, rng) * gaussian(2, 8, rng);
  EXPECT_LT(best_k_error(L, 2), 1e-12 * nuclear_norm(L));
  EXPECT_THROW(best_k_error(D, 4), InvalidArgument);
}

TEST(BestKError, NoRandomRankTwoCandidateBeatsTruncation) {
  Rng rng(10);
  const DenseMatrix X = gaussian(5, 6, rng);
  const double floor = best_k_error(X, 2);
  double best = kInfinity;
  for (int t = 0; t < 200; ++t) {
    // Perturbations of the truncation plus fresh random candidates.
    const DenseMatrix Z = t % 2 ? DenseMatrix(gaussian(5, 2, rng) * gaussian(2, 6, rng))
                                : DenseMatrix(truncate_k(svd(X + 0.1 * gaussian(5, 6, rng)), 2));
    best = std::min(best, nuclear_norm(X - Z));
  }
  EXPECT_GE(best, floor - 1e-12);
}

// Appendix inequalities as randomized properties.
TEST(Inequalities, WeylStability) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix X = gaussian(4, 6, rng);
    const DenseMatrix Y = X + std::pow(10.0, -3.0 * rng.uniform()) * gaussian(4, 6, rng);
    const double gap = (singular_values(X) - singular_values(Y)).cwiseAbs().maxCoeff();
    EXPECT_LE(gap, (X - Y).norm() + 1e-9);
  }
}

TEST(Inequalities, Rearrangement) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix X = gaussian(6, 6, rng);
    const DenseMatrix Y = gaussian(6, 3, rng) * gaussian(3, 6, rng) + 0.1 * gaussian(6, 6, rng);
    const Vector sx = singular_values(X);
    for (Index j = 0; j < 6; ++j) {
      for (Index J = j + 1; J <= 6; ++J) {
        const double lhs = static_cast<double>(J - j) * sx(J - 1);
        const double rhs = nuclear_norm(X - Y) + best_k_error(Y, j);
        EXPECT_LE(lhs, rhs + 1e-9);
      }
    }
  }
}

TEST(Inequalities, OrthogonalAdditivity) {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    const DenseMatrix P = random_orthogonal(6, rng);
    const DenseMatrix Q = random_orthogonal(7, rng);
    const DenseMatrix X = P.leftCols(2) * gaussian(2, 2, rng) * Q.leftCols(2).transpose();
    const DenseMatrix Z = P.rightCols(3) * gaussian(3, 3, rng) * Q.rightCols(3).transpose();
    const double sum = nuclear_norm(X) + nuclear_norm(Z);
    EXPECT_NEAR(nuclear_norm(X + Z), sum, 1e-9 * sum);
  }
}

TEST(MatrixText, RoundTripsAndRejectsTruncation) {
  Rng rng(15);
  const DenseMatrix X = gaussian(3, 4, rng);
  std::stringstream buf;
  write_matrix_text(buf, X);
  EXPECT_EQ(read_matrix_text(buf), X);
  std::istringstream bad("2 2\n1 2\n3\n");
  EXPECT_THROW(read_matrix_text(bad), FormatError);
  std::istringstream header("0 2\n");
  EXPECT_THROW(read_matrix_text(header), FormatError);
}

}  // namespace
}  // namespace lrmr
