#include "lrmr/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "lrmr/errors.hpp"
#include "lrmr/random.hpp"

namespace lrmr {
namespace {

void fix_signs(SvdFactors& f) {
  for (Index j = 0; j < f.U.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < f.U.rows(); ++i) {
      const double a = std::abs(f.U(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (f.U(arg, j) < 0.0) {
      f.U.col(j) *= -1.0;
      f.V.col(j) *= -1.0;
    }
  }
}

// Works on the wide orientation (rows <= cols) and transposes back.
SvdFactors svd_wide(const DenseMatrix& X) {
  Eigen::BDCSVD<DenseMatrix> solver(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("SVD did not converge");
  }
  SvdFactors f{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  return f;
}

void check_k(Index k, Index q) {
  if (k < 0 || k > q) {
    throw InvalidArgument("rank index " + std::to_string(k) + " outside [0, " +
                          std::to_string(q) + "]");
  }
}

}  // namespace

DenseMatrix SvdFactors::recompose() const {
  return U * sigma.asDiagonal() * V.transpose();
}

void require_finite(const DenseMatrix& X, const char* what) {
  if (X.rows() < 1 || X.cols() < 1) {
    throw InvalidInput(std::string(what) + " is empty");
  }
  if (!X.allFinite()) {
    throw InvalidInput(std::string(what) + " has non-finite entries");
  }
}

SvdFactors svd(const DenseMatrix& X) {
  require_finite(X);
  SvdFactors f;
  if (X.rows() > X.cols()) {
    SvdFactors t = svd_wide(X.transpose());
    f = SvdFactors{std::move(t.V), std::move(t.sigma), std::move(t.U)};
  } else {
    f = svd_wide(X);
  }
  fix_signs(f);
  return f;
}

Vector singular_values(const DenseMatrix& X) {
  require_finite(X);
  if (X.rows() > X.cols()) {
    return Eigen::BDCSVD<DenseMatrix>(X.transpose()).singularValues();
  }
  return Eigen::BDCSVD<DenseMatrix>(X).singularValues();
}

SvdFactors partial_svd(const DenseMatrix& X, Index count, double tol, std::uint64_t seed,
                       int max_sweeps) {
  require_finite(X);
  const Index q = std::min(X.rows(), X.cols());
  check_k(count, q);
  const Index block = std::min(q, count + 8);
  if (count == 0 || block >= q / 2) {
    SvdFactors full = svd(X);
    full.U.conservativeResize(Eigen::NoChange, count);
    full.V.conservativeResize(Eigen::NoChange, count);
    full.sigma.conservativeResize(count);
    return full;
  }

  Rng rng(seed);
  DenseMatrix Q(X.cols(), block);
  for (Index j = 0; j < block; ++j)
    for (Index i = 0; i < X.cols(); ++i) Q(i, j) = rng.normal();
  Q = Eigen::HouseholderQR<DenseMatrix>(Q).householderQ() *
      DenseMatrix::Identity(X.cols(), block);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    DenseMatrix left = X * Q;
    DenseMatrix P = Eigen::HouseholderQR<DenseMatrix>(left).householderQ() *
                    DenseMatrix::Identity(X.rows(), block);
    DenseMatrix right = X.transpose() * P;
    Q = Eigen::HouseholderQR<DenseMatrix>(right).householderQ() *
        DenseMatrix::Identity(X.cols(), block);

    // Rayleigh-Ritz on the projected block.
    const DenseMatrix small = P.transpose() * X * Q;
    Eigen::JacobiSVD<DenseMatrix> inner(small, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdFactors f{P * inner.matrixU().leftCols(count), inner.singularValues().head(count),
                 Q * inner.matrixV().leftCols(count)};
    const double scale = std::max(f.sigma(0), std::numeric_limits<double>::min());
    const DenseMatrix residual = X * f.V - f.U * f.sigma.asDiagonal();
    const DenseMatrix residual_t = X.transpose() * f.U - f.V * f.sigma.asDiagonal();
    if (residual.colwise().norm().maxCoeff() <= tol * scale &&
        residual_t.colwise().norm().maxCoeff() <= tol * scale) {
      fix_signs(f);
      return f;
    }
  }
  SvdFactors full = svd(X);
  full.U.conservativeResize(Eigen::NoChange, count);
  full.V.conservativeResize(Eigen::NoChange, count);
  full.sigma.conservativeResize(count);
  return full;
}

DenseMatrix truncate_k(const SvdFactors& f, Index k) {
  check_k(k, f.sigma.size());
  return f.U.leftCols(k) * f.sigma.head(k).asDiagonal() * f.V.leftCols(k).transpose();
}

Vector eps_stabilize(const Vector& sigma, double eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("stabilization parameter must be nonnegative");
  return sigma.cwiseMax(eps);
}

double schatten_norm(const DenseMatrix& X, double q) {
  if (!(q >= 1.0)) throw InvalidArgument("Schatten exponent must be >= 1");
  const Vector s = singular_values(X);
  if (std::isinf(q)) return s.size() ? s(0) : 0.0;
  if (q == 1.0) return s.sum();
  if (q == 2.0) return s.norm();
  return std::pow(s.array().pow(q).sum(), 1.0 / q);
}

double best_k_error(const DenseMatrix& X, Index k) {
  const Vector s = singular_values(X);
  check_k(k, s.size());
  return s.tail(s.size() - k).sum();
}

DenseMatrix read_matrix_text(std::istream& in) {
  long rows = 0;
  long cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
    throw FormatError("matrix header must be 'rows cols' with positive sizes");
  }
  DenseMatrix X(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> X(i, j))) {
        throw FormatError("matrix truncated at row " + std::to_string(i) + ", column " +
                          std::to_string(j));
      }
    }
  }
  if (!X.allFinite()) throw FormatError("matrix has non-finite entries");
  return X;
}

void write_matrix_text(std::ostream& out, const DenseMatrix& X) {
  std::ostringstream buf;
  buf << X.rows() << ' ' << X.cols() << '\n' << std::setprecision(17);
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j) buf << ' ';
      buf << X(i, j);
    }
    buf << '\n';
  }
  out << buf.str();
}

}  // namespace lrmr
