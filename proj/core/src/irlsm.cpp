#include "lrmr/irlsm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>

#include "lrmr/errors.hpp"

namespace lrmr {
namespace {

// Full SVD up to this size; block power iteration above it.
constexpr Index kFullSvdLimit = 256;
constexpr double kRelGapFloor = 1e-12;

// Cholesky with one jittered retry. Returns nullopt if both attempts fail.
std::optional<Eigen::LLT<DenseMatrix>> spd_factor(DenseMatrix A) {
  Eigen::LLT<DenseMatrix> llt(A);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-12 * std::max(A.trace(), 0.0) / static_cast<double>(A.rows());
  A.diagonal().array() += jitter > 0.0 ? jitter : 1e-300;
  llt.compute(A);
  if (llt.info() == Eigen::Success) return llt;
  return std::nullopt;
}

// X_j = U c + S_j^T (M_j - U_j c),  c = (eps diag(sigma - eps)^{-1} + U_j^T U_j)^{-1} U_j^T M_j.
// Algebraically W^{-1} S_j^T (S_j W^{-1} S_j^T)^{-1} M_j with the inverse taken
// through the Woodbury identity, rearranged so no eps^{-1} factor appears.
void update_column(const CompletionOperator& c, const MeasurementVec& M, const WeightFactors& W,
                   const Vector& ridge, Index j, DenseMatrix& X) {
  const auto& rows = c.rows_by_col[j];
  const Index mj = static_cast<Index>(rows.size());
  const Index r = W.rank();
  auto col = X.col(j);
  col.setZero();
  if (mj == 0) return;
  const auto Mj = M.segment(c.offsets[j], mj);
  if (r == 0) {
    for (Index t = 0; t < mj; ++t) col(rows[t]) = Mj(t);
    return;
  }
  DenseMatrix Uj(mj, r);
  for (Index t = 0; t < mj; ++t) Uj.row(t) = W.basis.row(rows[t]);
  DenseMatrix C = Uj.transpose() * Uj;
  C.diagonal() += ridge;
  const Vector rhs = Uj.transpose() * Mj;
  if (auto llt = spd_factor(C)) {
    const Vector coef = llt->solve(rhs);
    col.noalias() = W.basis * coef;
    const Vector resid = Mj - Uj * coef;
    for (Index t = 0; t < mj; ++t) col(rows[t]) += resid(t);
    return;
  }
  // Woodbury system failed: factor S_j W^{-1} S_j^T directly.
  DenseMatrix G = Uj * (W.sigma.array() - W.eps).matrix().asDiagonal() * Uj.transpose();
  G.diagonal().array() += W.eps;
  auto llt = spd_factor(G);
  if (!llt) throw NumericalFailure("column " + std::to_string(j) + " system is singular");
  const Vector y = llt->solve(Mj);
  Vector scatter = Vector::Zero(c.n);
  for (Index t = 0; t < mj; ++t) scatter(rows[t]) = y(t);
  col = W.apply_inverse(scatter);
}

struct Spectrum {
  SvdFactors factors;  // leading triplets (all of them when `full`)
  bool full = true;
};

Spectrum spectrum_of(const DenseMatrix& X, Index wanted) {
  const Index q = std::min(X.rows(), X.cols());
  if (q <= kFullSvdLimit) return {svd(X), true};
  return {partial_svd(X, std::min(q, wanted)), false};
}

double j_value(const Spectrum& s, const DenseMatrix& X, const WeightFactors& W) {
  const Index r = W.rank();
  const Vector& sigma = s.factors.sigma;
  double tail_sq = 0.0;
  if (s.full) {
    tail_sq = sigma.tail(sigma.size() - r).squaredNorm();
  } else {
    tail_sq = (X - W.basis * (W.basis.transpose() * X)).squaredNorm();
  }
  // ||W^{1/2} X||_F^2 = sum_{j<=r} sigma_j + tail / eps.
  return 0.5 * (sigma.head(r).sum() + tail_sq / W.eps + W.trace_inverse());
}

double relative_residual(const MeasurementOp& op, const DenseMatrix& X, const MeasurementVec& M) {
  const double scale = std::max(M.norm(), std::numeric_limits<double>::min());
  return (apply(op, X) - M).norm() / scale;
}

}  // namespace

WeightFactors WeightFactors::scaled_identity(Index dim, double eps) {
  return WeightFactors{eps, dim, DenseMatrix(dim, 0), Vector(0)};
}

DenseMatrix WeightFactors::apply(const DenseMatrix& X) const {
  const Vector d = sigma.cwiseInverse().array() - 1.0 / eps;
  return X / eps + basis * (d.asDiagonal() * (basis.transpose() * X));
}

DenseMatrix WeightFactors::apply_inverse(const DenseMatrix& X) const {
  const Vector d = sigma.array() - eps;
  return eps * X + basis * (d.asDiagonal() * (basis.transpose() * X));
}

DenseMatrix WeightFactors::dense() const { return apply(DenseMatrix::Identity(dim, dim)); }

DenseMatrix WeightFactors::dense_inverse() const {
  return apply_inverse(DenseMatrix::Identity(dim, dim));
}

double WeightFactors::trace_inverse() const {
  return static_cast<double>(dim - rank()) * eps + sigma.sum();
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::EpsZero: return "eps_zero";
    case StopReason::MaxIter: return "max_iter";
    case StopReason::EpsStalled: return "eps_stalled";
    case StopReason::Determined: return "determined";
  }
  return "unknown";
}

std::string_view to_string(SolverPath path) {
  switch (path) {
    case SolverPath::Auto: return "auto";
    case SolverPath::Dense: return "dense";
    case SolverPath::Woodbury: return "woodbury";
  }
  return "unknown";
}

void SolverConfig::validate(Index n, Index p) const {
  const Index q = std::min(n, p);
  if (rank < 1 || rank >= q) {
    throw InvalidArgument("rank K = " + std::to_string(rank) + " must satisfy 1 <= K < " +
                          std::to_string(q));
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("gamma must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (!(eps_stall_tol >= 0.0)) throw InvalidArgument("eps_stall_tol must be nonnegative");
  if (eps_stall_len < 0) throw InvalidArgument("eps_stall_len must be nonnegative");
  if (threads < 1) throw InvalidArgument("threads must be positive");
}

DenseMatrix x_update_dense(const MeasurementOp& op, const MeasurementVec& M,
                           const WeightFactors& W) {
  const Index n = op.rows();
  const Index p = op.cols();
  const Index m = op.size();
  if (M.size() != m) throw InvalidArgument("measurement vector length mismatch");
  if (W.dim != n) throw InvalidArgument("weight dimension does not match operator rows");

  // Column a of `weighted` is vec(W^{-1} S^*(e_a)).
  const DenseMatrix A = op.coefficient_matrix();
  DenseMatrix weighted(n * p, m);
  {
    DenseMatrix At = A.transpose();
    auto blocks = At.reshaped(n, p * m);
    weighted.reshaped(n, p * m) = W.apply_inverse(blocks);
  }
  DenseMatrix G = A * weighted;
  G = 0.5 * (G + G.transpose()).eval();
  auto llt = spd_factor(G);
  if (!llt) throw IllPosed("normal system S W^{-1} S^* is singular; operator not surjective?");

  Vector lambda = llt->solve(M);
  Vector x = weighted * lambda;
  // One step of iterative refinement on the constraint residual.
  const Vector resid = M - A * x;
  x += weighted * llt->solve(resid);
  if (!x.allFinite()) throw NumericalFailure("dense update produced non-finite values");
  const double scale = std::max(M.norm(), std::numeric_limits<double>::min());
  if ((A * x - M).norm() > 1e-6 * scale) {
    throw IllPosed("constraints cannot be met; operator not surjective?");
  }
  return x.reshaped(n, p);
}

DenseMatrix x_update_completion(const MeasurementOp& op, const MeasurementVec& M,
                                const WeightFactors& W, int threads) {
  const CompletionOperator& c = op.as_completion();
  if (M.size() != op.size()) throw InvalidArgument("measurement vector length mismatch");
  if (W.dim != c.n) throw InvalidArgument("weight dimension does not match operator rows");
  const Vector ridge = W.eps * (W.sigma.array() - W.eps).inverse();
  DenseMatrix X(c.n, c.p);

  const auto run = [&](Index begin, Index end) {
    for (Index j = begin; j < end; ++j) update_column(c, M, W, ridge, j, X);
  };
  const Index workers = std::clamp<Index>(threads, 1, c.p);
  if (workers == 1) {
    run(0, c.p);
  } else {
    // Each worker owns a contiguous range of columns and writes nothing else.
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (Index w = 0; w < workers; ++w) {
      const Index begin = c.p * w / workers;
      const Index end = c.p * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  if (!X.allFinite()) throw NumericalFailure("completion update produced non-finite values");
  return X;
}

WeightFactors weight_from_factors(const SvdFactors& f, Index dim, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("weight update needs eps > 0");
  const Vector& s = f.sigma;
  const double top = s.size() ? s(0) : 0.0;
  Index r = 0;
  while (r < s.size() && s(r) > eps * (1.0 + 1e-12) && s(r) - eps >= kRelGapFloor * top) ++r;
  return WeightFactors{eps, dim, f.U.leftCols(r), s.head(r)};
}

WeightFactors weight_update(const DenseMatrix& X, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("weight update needs eps > 0");
  return weight_from_factors(svd(X), X.rows(), eps);
}

double eps_update(double eps_prev, double gamma, double sigma_next) {
  return std::min(eps_prev, gamma * sigma_next);
}

double numerical_sigma(const Vector& sigma, Index index, Index n, Index p) {
  if (index >= sigma.size()) return 0.0;
  const double floor = static_cast<double>(std::max(n, p)) *
                       std::numeric_limits<double>::epsilon() * sigma(0);
  return sigma(index) <= floor ? 0.0 : sigma(index);
}

namespace {

bool stalled_step(double prev, double cur, const SolverConfig& cfg) {
  return std::abs(cur - prev) <= cfg.eps_stall_tol * cur;
}

}  // namespace

std::optional<StopReason> stop_check(std::span<const IterationRecord> trace,
                                     const SolverConfig& cfg) {
  if (trace.empty()) return std::nullopt;
  if (trace.back().eps == 0.0) return StopReason::EpsZero;
  if (static_cast<int>(trace.size()) >= cfg.max_iter) return StopReason::MaxIter;
  int run = 0;
  for (std::size_t l = trace.size() - 1; l > 0; --l) {
    const double cur = trace[l].eps;
    const double prev = trace[l - 1].eps;
    if (stalled_step(prev, cur, cfg)) {
      ++run;
    } else {
      break;
    }
  }
  if (run > cfg.eps_stall_len) return StopReason::EpsStalled;
  return std::nullopt;
}

SolverReport solve(const MeasurementOp& input_op, const MeasurementVec& input_M,
                   const SolverConfig& cfg) {
  cfg.validate(input_op.rows(), input_op.cols());
  if (input_M.size() != input_op.size()) {
    throw InvalidArgument("measurement vector length mismatch");
  }
  if (!input_M.allFinite()) throw InvalidInput("measurements have non-finite entries");

  // Run on the orientation with n <= p; the weight acts on the shorter side.
  const bool transposed = input_op.rows() > input_op.cols();
  std::optional<std::pair<MeasurementOp, MeasurementVec>> flipped;
  if (transposed) flipped = transpose_problem(input_op, input_M);
  const MeasurementOp& op = transposed ? flipped->first : input_op;
  const MeasurementVec& M = transposed ? flipped->second : input_M;

  const Index n = op.rows();
  const Index p = op.cols();
  const Index K = cfg.rank;
  const bool woodbury = cfg.path == SolverPath::Woodbury ||
                        (cfg.path == SolverPath::Auto && op.is_completion());
  if (woodbury && !op.is_completion()) {
    throw InvalidArgument("Woodbury path requires an entry-sampling operator");
  }
  const auto update = [&](const WeightFactors& W) {
    return woodbury ? x_update_completion(op, M, W, cfg.threads) : x_update_dense(op, M, W);
  };

  SolverReport report;
  report.working_rows = n;
  report.transposed = transposed;
  WeightFactors W = WeightFactors::scaled_identity(n, 1.0);
  double eps = 1.0;
  double prev_eps = 1.0;
  int stall_run = 0;
  DenseMatrix X_prev;
  DenseMatrix X;

  for (int l = 1;; ++l) {
    const auto start = std::chrono::steady_clock::now();
    X = update(W);
    if (!X.allFinite()) throw NumericalFailure("iterate became non-finite");
    if (l == 1) {
      report.j_start = 0.5 * (W.apply(X).cwiseProduct(X).sum() + W.trace_inverse());
    }

    const Index wanted = std::max(K + 1, W.rank()) + 8;
    Spectrum spec = spectrum_of(X, wanted);
    const Vector& sigma = spec.factors.sigma;
    const double sigma_next = numerical_sigma(sigma, K, n, p);
    eps = eps_update(eps, cfg.gamma, sigma_next);

    IterationRecord rec;
    rec.iteration = l;
    rec.eps = eps;
    rec.sigma_next = sigma_next;
    rec.step_frobenius = l == 1 ? 0.0 : (X - X_prev).norm();
    rec.nuclear_norm = spec.full ? sigma.sum() : std::numeric_limits<double>::quiet_NaN();
    rec.feasibility = relative_residual(op, X, M);

    if (eps > 0.0) {
      // With a partial spectrum every stored value may exceed eps; widen until
      // the block reaches below eps or covers the whole spectrum.
      while (!spec.full && spec.factors.sigma.size() < std::min(n, p) &&
             spec.factors.sigma(spec.factors.sigma.size() - 1) > eps) {
        spec = spectrum_of(X, 2 * spec.factors.sigma.size());
      }
      W = weight_from_factors(spec.factors, n, eps);
      rec.r = W.rank();
      rec.j_value = j_value(spec, X, W);
      rec.trace_w_inverse = W.trace_inverse();
    } else {
      // eps = 0: J(X, W) tends to ||X||_* as the stabilization vanishes.
      rec.r = 0;
      rec.j_value = spec.full ? sigma.sum() : singular_values(X).sum();
      rec.nuclear_norm = rec.j_value;
      rec.trace_w_inverse = rec.j_value;
    }
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stall_run = (l > 1 && stalled_step(prev_eps, eps, cfg)) ? stall_run + 1 : 0;
    prev_eps = eps;
    if (!cfg.record_trace) report.trace.clear();
    report.trace.push_back(rec);
    report.iterations = l;
    if (cfg.keep_iterates) report.iterates.push_back(transposed ? X.transpose() : X);

    // Same decision as stop_check, with the stall run tracked incrementally.
    if (op.size() >= n * p) {
      report.stop_reason = StopReason::Determined;
      break;
    }
    if (eps == 0.0) {
      report.stop_reason = StopReason::EpsZero;
      break;
    }
    if (l >= cfg.max_iter) {
      report.stop_reason = StopReason::MaxIter;
      break;
    }
    if (stall_run > cfg.eps_stall_len) {
      report.stop_reason = StopReason::EpsStalled;
      break;
    }
    X_prev = std::move(X);
  }

  report.x_final = transposed ? DenseMatrix(X.transpose()) : std::move(X);
  return report;
}

}  // namespace lrmr
