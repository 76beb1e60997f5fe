#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lrmr/matcore.hpp"
#include "lrmr/measure.hpp"

namespace lrmr {

/// Factored weight matrix
///
///   W      = eps^{-1} I + U_r diag(1/sigma_j - 1/eps) U_r^T,
///   W^{-1} = eps I      + U_r diag(sigma_j - eps)   U_r^T,
///
/// i.e. W = U diag(max(sigma_j, eps))^{-1} U^T with only the r directions
/// whose singular value exceeds eps stored explicitly.
struct WeightFactors {
  double eps = 1.0;
  Index dim = 0;       // W is dim x dim
  DenseMatrix basis;   // dim x r, orthonormal columns
  Vector sigma;        // r values, each > eps

  Index rank() const { return sigma.size(); }

  /// eps^{-1} I, with no explicit directions. The solver starts from
  /// eps = 1, i.e. W = I.
  static WeightFactors scaled_identity(Index dim, double eps);

  DenseMatrix apply(const DenseMatrix& X) const;          // W X
  DenseMatrix apply_inverse(const DenseMatrix& X) const;  // W^{-1} X
  DenseMatrix dense() const;
  DenseMatrix dense_inverse() const;
  /// trace(W^{-1}) = ||W^{-1/2}||_F^2.
  double trace_inverse() const;
};

enum class SolverPath { Auto, Dense, Woodbury };
/// Determined: the operator is injective (m = n p), so the first iterate is
/// the only feasible point and the run ends after one iteration.
enum class StopReason { EpsZero, MaxIter, EpsStalled, Determined };

std::string_view to_string(StopReason reason);
std::string_view to_string(SolverPath path);

struct SolverConfig {
  Index rank = 1;  // K; needs 1 <= K < min(n, p)
  double gamma = 1.0;
  int max_iter = 200;
  double eps_stall_tol = 1e-6;
  int eps_stall_len = 50;
  SolverPath path = SolverPath::Auto;
  /// Worker threads for the column-separable update; 1 runs inline.
  int threads = 1;
  /// Keep every iterate X^l in the report (memory heavy; for diagnostics).
  bool keep_iterates = false;
  /// When false only the latest record is kept; for very long runs.
  bool record_trace = true;

  void validate(Index n, Index p) const;
};

struct IterationRecord {
  int iteration = 0;
  double j_value = 0.0;         // J(X^l, W^l)
  double eps = 0.0;             // eps_l
  Index r = 0;                  // explicit weight directions
  double step_frobenius = 0.0;  // ||X^l - X^{l-1}||_F, 0 for l = 1
  double seconds = 0.0;         // wall time of this iteration
  double sigma_next = 0.0;      // sigma_{K+1}(X^l)
  double nuclear_norm = 0.0;    // ||X^l||_*
  double trace_w_inverse = 0.0; // ||(W^l)^{-1/2}||_F^2
  double feasibility = 0.0;     // ||S(X^l) - M|| / ||M||
};

struct SolverReport {
  DenseMatrix x_final;
  int iterations = 0;
  StopReason stop_reason = StopReason::MaxIter;
  std::vector<IterationRecord> trace;
  /// J(X^1, W^0): the value the first weight update starts from.
  double j_start = 0.0;
  /// X^1, X^2, ... when SolverConfig::keep_iterates is set.
  std::vector<DenseMatrix> iterates;
  /// Rows of the problem the iteration ran on (n after transposing to n <= p).
  Index working_rows = 0;
  bool transposed = false;
};

/// Minimizer of ||W^{1/2} X||_F subject to S(X) = M, through the m x m
/// normal system S W^{-1} S^* lambda = M. Works for any operator.
DenseMatrix x_update_dense(const MeasurementOp& op, const MeasurementVec& M,
                           const WeightFactors& W);

/// Same minimizer for entry-sampling operators, column by column. Each
/// column solves one r x r system (Woodbury form of (S_i W^{-1} S_i^T)^{-1}).
DenseMatrix x_update_completion(const MeasurementOp& op, const MeasurementVec& M,
                                const WeightFactors& W, int threads = 1);

/// Weight from the spectrum of X X^T stabilized at eps.
WeightFactors weight_update(const DenseMatrix& X, double eps);

/// Same, from precomputed (possibly partial) singular factors of X.
WeightFactors weight_from_factors(const SvdFactors& f, Index dim, double eps);

double eps_update(double eps_prev, double gamma, double sigma_next);

/// sigma_{K+1} with values at roundoff level, at most max(n, p) * machine
/// epsilon * sigma_1, read as exactly zero. This is how the iteration
/// reaches eps = 0 in floating point.
double numerical_sigma(const Vector& sigma, Index index, Index n, Index p);

/// eps_zero if the last eps is 0, max_iter once the trace has max_iter
/// records, eps_stalled once more than eps_stall_len consecutive relative
/// eps changes |eps_l - eps_{l-1}| / eps_l are <= eps_stall_tol.
std::optional<StopReason> stop_check(std::span<const IterationRecord> trace,
                                     const SolverConfig& cfg);

SolverReport solve(const MeasurementOp& op, const MeasurementVec& M, const SolverConfig& cfg);

}  // namespace lrmr
