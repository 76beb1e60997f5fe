#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lrmr/irlsm.hpp"
#include "lrmr/matcore.hpp"
#include "lrmr/measure.hpp"

namespace lrmr {

/// One planted-solution experiment: a random rank-k n x p matrix observed on
/// floor(kappa n p) uniformly sampled entries, optionally with Gaussian noise.
struct TrialSpec {
  Index n = 100;
  Index p = 100;
  Index k = 5;
  double kappa = 0.35;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  SolverConfig solver;

  void validate() const;
};

/// X = U diag(s) V^T with U (n x k), V (p x k) and s (k) all i.i.d. standard
/// normal. The factors are not a singular value decomposition.
DenseMatrix gen_lowrank(Index n, Index p, Index k, std::uint64_t seed);

/// M + noise_sigma g, g i.i.d. standard normal.
MeasurementVec add_noise(const MeasurementVec& M, double noise_sigma, std::uint64_t seed);

/// ||Xhat - X||_F / ||X||_F.
double rel_error(const DenseMatrix& Xhat, const DenseMatrix& X);

struct TrialResult {
  TrialSpec spec;
  int trial = 0;
  std::uint64_t seed = 0;  // seed of this trial
  double rel_error = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  double final_eps = 0.0;
  std::string stop_reason;
  std::string status = "ok";  // "ok" or "error: <message>"
};

struct SpecAggregate {
  TrialSpec spec;
  int trials = 0;
  int failures = 0;
  double mean_rel_error = 0.0;
  double mean_seconds = 0.0;
  double mean_iterations = 0.0;
};

/// Seed of trial t of a spec: a splitmix64 mix of (spec seed, t).
std::uint64_t trial_seed(std::uint64_t spec_seed, int trial);

/// `report`, when given, receives the solver report of the trial.
TrialResult run_trial(const TrialSpec& spec, int trial, SolverReport* report = nullptr);

struct GridResult {
  std::vector<TrialResult> rows;
  std::vector<SpecAggregate> aggregates;
};

/// Runs `trials_per_spec` trials of each spec. A failing trial is recorded
/// in its status column and the grid continues. `threads` > 1 runs trials
/// concurrently; rows are reported in (spec, trial) order regardless.
GridResult run_grid(std::span<const TrialSpec> specs, int trials_per_spec, int threads = 1);

inline constexpr const char* kCsvHeader =
    "n,p,k,kappa,noise_sigma,trial,seed,rel_error,iterations,seconds,final_eps,stop_reason,"
    "status";

/// CSV with the header above, one row per trial, then one aggregate row per
/// spec with trial = "mean", empty seed and stop_reason, status = "aggregate"
/// and the means in rel_error, iterations and seconds. Reals use 8
/// significant digits; lines end in LF.
void write_csv(std::ostream& out, const GridResult& grid);

}  // namespace lrmr
