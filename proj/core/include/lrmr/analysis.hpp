#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrmr/irlsm.hpp"
#include "lrmr/matcore.hpp"
#include "lrmr/measure.hpp"

namespace lrmr {

/// J(X, W) = (||W^{1/2} X||_F^2 + ||W^{-1/2}||_F^2) / 2, evaluated through
/// the factored weight.
double j_functional(const DenseMatrix& X, const WeightFactors& W);

/// J(X, W) for an explicit symmetric positive definite W.
double j_functional_dense(const DenseMatrix& X, const DenseMatrix& W);

/// Smoothed nuclear norm: sum over the n = rows(X) singular values
/// (zero-padded when n > p) of |u| if |u| >= eps, else (u^2 + eps^2) / (2 eps).
double j_eps(const DenseMatrix& X, double eps);

/// Gradient U diag(j'(sigma)) V^T of j_eps, where j'(u) = 1 for u >= eps
/// and u / eps below.
DenseMatrix grad_j_eps(const DenseMatrix& X, double eps);

struct PropertyCheck {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // largest violation margin; <= 0 when passing
  int index = -1;      // iteration of the worst violation, -1 if none
};

struct MonotonicityDiagnostics {
  bool vacuous = false;
  double a_constant = 0.0;  // max_l ||(W^l)^{-1/2}||_F^2 over the trace
  PropertyCheck j_nonincreasing;
  PropertyCheck j_above_nuclear;
  PropertyCheck step_sum_bound;
  PropertyCheck nuclear_sandwich;

  bool all_pass() const {
    return j_nonincreasing.pass && j_above_nuclear.pass && step_sum_bound.pass &&
           nuclear_sandwich.pass;
  }
};

/// Runtime monitors on a solver trace:
///   (i)   J(X^{l+1}, W^{l+1}) <= J(X^l, W^l) (1 + 1e-10), starting from J(X^1, W^0);
///   (ii)  J(X^l, W^l) >= ||X^l||_* - 1e-9 J;
///   (iii) sum_{l <= N} ||X^{l+1} - X^l||_F^2 <= 2 A J(X^1, W^0) for every N,
///         with A = max_l trace((W^l)^{-1}) including W^0 = I;
///   and   J(X^l, W^l) - ||X^l||_* <= n eps_l.
/// A single-record trace passes vacuously.
MonotonicityDiagnostics check_monotonicity(const SolverReport& report);

/// max over `trials` kernel samples H of |<W X, H>| / (||W X||_F ||H||_F).
double optimality_residual(const DenseMatrix& X, const WeightFactors& W,
                           const MeasurementOp& op, int trials, std::uint64_t seed = 1);

struct WeightOptimality {
  bool pass = true;
  double j_optimal = 0.0;  // J(X, W_bar)
  double worst_gap = 0.0;  // max over trials of J(X, W_bar) - J(X, W); pass iff <= 1e-10
};

/// Compares J(X, W_bar) for the stabilized weight W_bar = weight_update(X, eps)
/// against `trials` random admissible W = Q diag(d) Q^T, Q Haar-orthogonal,
/// d log-uniform on [1e-3 / eps, 1 / eps].
WeightOptimality weight_optimality_check(const DenseMatrix& X, double eps, int trials,
                                         std::uint64_t seed = 1);

/// Monte-Carlo lower bound on the restricted isometry constant delta_k:
/// the largest |‖S(X)‖^2 - 1| seen over `trials` random unit-Frobenius
/// rank-k matrices X = A B^T (Gaussian factors), plus any `extra`
/// directions supplied by the caller (normalized before use). Never an
/// upper bound. Trial t draws from stream t of `seed`, so more trials can
/// only raise the estimate.
double rip_estimate(const MeasurementOp& op, Index k, int trials, std::uint64_t seed,
                    std::span<const DenseMatrix> extra = {});

/// eta = sqrt(2) delta_4k / (1 - delta_3k); needs 0 <= delta_3k <= delta_4k < 1.
double eta_from_rip(double delta_3k, double delta_4k);

/// Error constant
///   4 (1+eta)^2 / ((1-eta)^2 ((K-k)(1-eta) - 2 eta)) + 2 (1+eta) / (1-eta),
/// defined for 0 <= eta < 1 and k < K - 2 eta / (1 - eta).
double lambda_bound(double eta, Index K, Index k);

/// eta < 1 - 2 / (K - 2), the regime of the convergence guarantee for
/// gamma = 1/n. False for K <= 2.
bool convergence_regime(double eta, Index K);

struct GuaranteeInputs {
  double delta_3k = 0.0;
  double delta_4k = 0.0;
  Index K = 0;
  Index k = 0;
};

struct GuaranteeReport {
  double eta = 0.0;
  bool eta_below_one = false;
  bool convergence_regime = false;
  std::optional<double> lambda;  // absent when k is out of regime
};

GuaranteeReport guarantee_report(const GuaranteeInputs& in);

}  // namespace lrmr
