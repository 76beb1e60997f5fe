#include "lrmr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <thread>
#include <utility>

#include "lrmr/errors.hpp"
#include "lrmr/random.hpp"

namespace lrmr {
namespace {

constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kMaskSeedStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

void spec_columns(std::ostream& out, const TrialSpec& s) {
  out << s.n << ',' << s.p << ',' << s.k << ',' << real(s.kappa) << ','
      << real(s.noise_sigma) << ',';
}

}  // namespace

void TrialSpec::validate() const {
  if (n < 1 || p < 1) throw InvalidArgument("trial dimensions must be positive");
  if (k < 0 || k > std::min(n, p)) throw InvalidArgument("planted rank must lie in [0, min(n, p)]");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in (0, 1]");
  if (std::floor(kappa * static_cast<double>(n * p)) < 1.0) {
    throw InvalidArgument("kappa n p must be at least one measurement");
  }
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be nonnegative");
}

DenseMatrix gen_lowrank(Index n, Index p, Index k, std::uint64_t seed) {
  if (n < 1 || p < 1) throw InvalidArgument("dimensions must be positive");
  if (k < 0 || k > std::min(n, p)) throw InvalidArgument("rank must lie in [0, min(n, p)]");
  Rng rng = Rng::stream(seed, kFactorStream);
  DenseMatrix U(n, k);
  DenseMatrix V(p, k);
  Vector s(k);
  // Rows of U, then rows of V, then the diagonal.
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j) U(i, j) = rng.normal();
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < k; ++j) V(i, j) = rng.normal();
  for (Index j = 0; j < k; ++j) s(j) = rng.normal();
  return U * s.asDiagonal() * V.transpose();
}

MeasurementVec add_noise(const MeasurementVec& M, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be nonnegative");
  if (noise_sigma == 0.0) return M;
  Rng rng = Rng::stream(seed, kNoiseStream);
  MeasurementVec out = M;
  for (Index a = 0; a < out.size(); ++a) out(a) += noise_sigma * rng.normal();
  return out;
}

double rel_error(const DenseMatrix& Xhat, const DenseMatrix& X) {
  if (Xhat.rows() != X.rows() || Xhat.cols() != X.cols()) {
    throw InvalidArgument("rel_error needs matrices of equal shape");
  }
  const double ref = X.norm();
  if (!(ref > 0.0)) throw InvalidArgument("rel_error reference matrix is zero");
  return (Xhat - X).norm() / ref;
}

std::uint64_t trial_seed(std::uint64_t spec_seed, int trial) {
  return Rng::mix(spec_seed ^ Rng::mix(static_cast<std::uint64_t>(trial) + 0x7472));
}

TrialResult run_trial(const TrialSpec& spec, int trial, SolverReport* report) {
  TrialResult out;
  out.spec = spec;
  out.trial = trial;
  out.seed = trial_seed(spec.seed, trial);
  try {
    spec.validate();
    const DenseMatrix X = gen_lowrank(spec.n, spec.p, spec.k, out.seed);
    const auto mask =
        uniform_mask(spec.n, spec.p, spec.kappa, Rng::mix(out.seed ^ kMaskSeedStream));
    const MeasurementOp op = completion_op(spec.n, spec.p, mask);
    const MeasurementVec M = add_noise(apply(op, X), spec.noise_sigma, out.seed);
    const auto start = std::chrono::steady_clock::now();
    SolverReport rep = solve(op, M, spec.solver);
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.seconds = std::round(out.seconds * 1000.0) / 1000.0;
    out.rel_error = rel_error(rep.x_final, X);
    out.iterations = rep.iterations;
    out.final_eps = rep.trace.back().eps;
    out.stop_reason = std::string(to_string(rep.stop_reason));
    if (report) *report = std::move(rep);
  } catch (const std::exception& e) {
    out.status = std::string("error: ") + e.what();
  }
  return out;
}

GridResult run_grid(std::span<const TrialSpec> specs, int trials_per_spec, int threads) {
  if (specs.empty()) throw InvalidArgument("run_grid needs at least one spec");
  if (trials_per_spec < 1) throw InvalidArgument("trials_per_spec must be positive");
  GridResult grid;
  const std::size_t total = specs.size() * static_cast<std::size_t>(trials_per_spec);
  grid.rows.resize(total);
  const auto job = [&](std::size_t idx) {
    grid.rows[idx] = run_trial(specs[idx / trials_per_spec], static_cast<int>(idx % trials_per_spec));
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) job(i);
      });
    }
  }
  for (std::size_t s = 0; s < specs.size(); ++s) {
    SpecAggregate agg;
    agg.spec = specs[s];
    int ok = 0;
    for (int t = 0; t < trials_per_spec; ++t) {
      const TrialResult& r = grid.rows[s * trials_per_spec + t];
      ++agg.trials;
      if (r.status != "ok") {
        ++agg.failures;
        continue;
      }
      ++ok;
      agg.mean_rel_error += r.rel_error;
      agg.mean_seconds += r.seconds;
      agg.mean_iterations += r.iterations;
    }
    if (ok > 0) {
      agg.mean_rel_error /= ok;
      agg.mean_seconds /= ok;
      agg.mean_iterations /= ok;
    } else {
      agg.mean_rel_error = agg.mean_seconds = agg.mean_iterations = std::nan("");
    }
    grid.aggregates.push_back(agg);
  }
  return grid;
}

void write_csv(std::ostream& out, const GridResult& grid) {
  out << kCsvHeader << '\n';
  for (const TrialResult& r : grid.rows) {
    spec_columns(out, r.spec);
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << r.trial << ',' << r.seed << ',' << real(r.rel_error) << ',' << r.iterations << ','
        << real(r.seconds) << ',' << real(r.final_eps) << ',' << r.stop_reason << ',' << status
        << '\n';
  }
  for (const SpecAggregate& a : grid.aggregates) {
    spec_columns(out, a.spec);
    out << "mean,," << real(a.mean_rel_error) << ',' << real(a.mean_iterations) << ','
        << real(a.mean_seconds) << ",,," << "aggregate" << '\n';
  }
}

}  // namespace lrmr
