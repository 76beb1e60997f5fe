#include "lrmr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lrmr/errors.hpp"
#include "lrmr/random.hpp"

namespace lrmr {
namespace {

constexpr std::uint64_t kWeightStream = 0x77656967;
constexpr std::uint64_t kRipStream = 0x726970;

double j_scalar(double u, double eps) {
  const double a = std::abs(u);
  return a >= eps ? a : (u * u + eps * eps) / (2.0 * eps);
}

DenseMatrix gaussian(Index rows, Index cols, Rng& rng) {
  DenseMatrix G(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = rng.normal();
  return G;
}

DenseMatrix haar_orthogonal(Index n, Rng& rng) {
  Eigen::HouseholderQR<DenseMatrix> qr(gaussian(n, n, rng));
  DenseMatrix Q = qr.householderQ();
  const Vector diag = qr.matrixQR().diagonal();
  for (Index j = 0; j < n; ++j)
    if (diag(j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

}  // namespace

double j_functional(const DenseMatrix& X, const WeightFactors& W) {
  if (X.rows() != W.dim) throw InvalidArgument("weight dimension does not match rows of X");
  const DenseMatrix coords = W.basis.transpose() * X;
  const DenseMatrix outside = X - W.basis * coords;
  double weighted = outside.squaredNorm() / W.eps;
  for (Index j = 0; j < W.rank(); ++j) weighted += coords.row(j).squaredNorm() / W.sigma(j);
  return 0.5 * (weighted + W.trace_inverse());
}

double j_functional_dense(const DenseMatrix& X, const DenseMatrix& W) {
  if (W.rows() != X.rows() || W.cols() != X.rows()) {
    throw InvalidArgument("weight must be square with the row count of X");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (W + W.transpose()));
  if (eig.eigenvalues().minCoeff() <= 0.0) throw InvalidArgument("weight is not positive definite");
  const double quad = (X.transpose() * W * X).trace();
  return 0.5 * (quad + eig.eigenvalues().cwiseInverse().sum());
}

double j_eps(const DenseMatrix& X, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("smoothing parameter must be positive");
  const Vector s = singular_values(X);
  double total = 0.0;
  for (Index i = 0; i < s.size(); ++i) total += j_scalar(s(i), eps);
  // Rows beyond min(n, p) carry zero singular values.
  total += static_cast<double>(X.rows() - s.size()) * (eps / 2.0);
  return total;
}

DenseMatrix grad_j_eps(const DenseMatrix& X, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("smoothing parameter must be positive");
  const SvdFactors f = svd(X);
  Vector d(f.sigma.size());
  for (Index i = 0; i < d.size(); ++i) {
    d(i) = f.sigma(i) >= eps ? 1.0 : f.sigma(i) / eps;
  }
  return f.U * d.asDiagonal() * f.V.transpose();
}

MonotonicityDiagnostics check_monotonicity(const SolverReport& report) {
  MonotonicityDiagnostics d;
  d.j_nonincreasing.name = "J nonincreasing";
  d.j_above_nuclear.name = "J >= nuclear norm";
  d.step_sum_bound.name = "step partial sums <= 2 A J";
  d.nuclear_sandwich.name = "J - nuclear norm <= n eps";
  const auto& trace = report.trace;
  if (trace.size() < 2) {
    d.vacuous = true;
    return d;
  }
  const auto note = [](PropertyCheck& c, double margin, int index) {
    if (c.index < 0 || margin > c.worst) {
      c.worst = margin;
      c.index = index;
    }
  };
  const auto finish = [](PropertyCheck& c) {
    c.pass = c.worst <= 0.0;
    if (c.pass) c.index = -1;
  };
  const double n = static_cast<double>(report.working_rows);

  double prev_j = report.j_start;
  d.a_constant = n;  // W^0 = I
  for (const auto& rec : trace) {
    note(d.j_nonincreasing, rec.j_value - prev_j * (1.0 + 1e-10), rec.iteration);
    prev_j = rec.j_value;
    if (std::isfinite(rec.nuclear_norm)) {
      note(d.j_above_nuclear, (rec.nuclear_norm - 1e-9 * rec.j_value) - rec.j_value,
           rec.iteration);
      note(d.nuclear_sandwich,
           rec.j_value - rec.nuclear_norm - n * rec.eps - 1e-9 * rec.j_value, rec.iteration);
    }
    d.a_constant = std::max(d.a_constant, rec.trace_w_inverse);
  }
  const double bound = 2.0 * d.a_constant * report.j_start;
  double partial = 0.0;
  for (std::size_t l = 1; l < trace.size(); ++l) {
    partial += trace[l].step_frobenius * trace[l].step_frobenius;
    note(d.step_sum_bound, partial - bound * (1.0 + 1e-10), trace[l].iteration);
  }
  finish(d.j_nonincreasing);
  finish(d.j_above_nuclear);
  finish(d.step_sum_bound);
  finish(d.nuclear_sandwich);
  return d;
}

double optimality_residual(const DenseMatrix& X, const WeightFactors& W,
                           const MeasurementOp& op, int trials, std::uint64_t seed) {
  const DenseMatrix WX = W.apply(X);
  const double wx_norm = WX.norm();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const DenseMatrix H = kernel_sample(op, Rng::mix(seed + static_cast<std::uint64_t>(t)));
    const double denom = wx_norm * H.norm();
    if (denom == 0.0) continue;
    worst = std::max(worst, std::abs(WX.cwiseProduct(H).sum()) / denom);
  }
  return worst;
}

WeightOptimality weight_optimality_check(const DenseMatrix& X, double eps, int trials,
                                         std::uint64_t seed) {
  WeightOptimality out;
  out.j_optimal = j_functional(X, weight_update(X, eps));
  const Index n = X.rows();
  const double upper = 1.0 / eps;
  const double log_lo = std::log(1e-3 * upper);
  const double log_hi = std::log(upper);
  out.worst_gap = -kInfinity;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(Rng::mix(seed) ^ kWeightStream, static_cast<std::uint64_t>(t));
    const DenseMatrix Q = haar_orthogonal(n, rng);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d(i) = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
    const DenseMatrix QtX = Q.transpose() * X;
    const double quad = (d.asDiagonal() * QtX).cwiseProduct(QtX).sum();
    const double j = 0.5 * (quad + d.cwiseInverse().sum());
    out.worst_gap = std::max(out.worst_gap, out.j_optimal - j);
  }
  out.pass = out.worst_gap <= 1e-10;
  return out;
}

double rip_estimate(const MeasurementOp& op, Index k, int trials, std::uint64_t seed,
                    std::span<const DenseMatrix> extra) {
  const Index n = op.rows();
  const Index p = op.cols();
  if (k < 1 || k > std::min(n, p)) throw InvalidArgument("rank must lie in [1, min(n, p)]");
  const auto distortion = [&](const DenseMatrix& X) {
    const double norm = X.norm();
    if (norm == 0.0) return 0.0;
    const MeasurementVec y = apply(op, X / norm);
    return std::abs(y.squaredNorm() - 1.0);
  };
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed ^ kRipStream, static_cast<std::uint64_t>(t));
    const DenseMatrix A = gaussian(n, k, rng);
    const DenseMatrix B = gaussian(p, k, rng);
    best = std::max(best, distortion(A * B.transpose()));
  }
  for (const DenseMatrix& X : extra) {
    if (X.rows() != n || X.cols() != p) throw InvalidArgument("direction has the wrong shape");
    best = std::max(best, distortion(X));
  }
  return best;
}

double eta_from_rip(double delta_3k, double delta_4k) {
  if (!(delta_3k >= 0.0 && delta_3k <= delta_4k && delta_4k < 1.0)) {
    throw InvalidArgument("need 0 <= delta_3k <= delta_4k < 1");
  }
  return std::numbers::sqrt2 * delta_4k / (1.0 - delta_3k);
}

double lambda_bound(double eta, Index K, Index k) {
  if (!(eta >= 0.0 && eta < 1.0)) throw OutOfRegime("eta must lie in [0, 1)");
  if (k < 0 || K < 1) throw OutOfRegime("ranks must be nonnegative and K positive");
  const double gap = static_cast<double>(K - k);
  const double denom = gap * (1.0 - eta) - 2.0 * eta;  // > 0 iff k < K - 2 eta / (1 - eta)
  if (!(denom > 0.0)) throw OutOfRegime("need k < K - 2 eta / (1 - eta)");
  const double a = 1.0 + eta;
  const double b = 1.0 - eta;
  return 4.0 * a * a / (b * b * denom) + 2.0 * a / b;
}

bool convergence_regime(double eta, Index K) {
  if (K <= 2) return false;
  return eta < 1.0 - 2.0 / static_cast<double>(K - 2);
}

GuaranteeReport guarantee_report(const GuaranteeInputs& in) {
  if (in.k >= in.K) throw InvalidArgument("need k < K");
  GuaranteeReport r;
  r.eta = eta_from_rip(in.delta_3k, in.delta_4k);
  r.eta_below_one = r.eta < 1.0;
  r.convergence_regime = convergence_regime(r.eta, in.K);
  if (r.eta < 1.0) {
    try {
      r.lambda = lambda_bound(r.eta, in.K, in.k);
    } catch (const OutOfRegime&) {
      r.lambda.reset();
    }
  }
  return r;
}

}  // namespace lrmr
