#include "suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include <Eigen/SVD>

#include "lrmr/analysis.hpp"
#include "lrmr/bench.hpp"
#include "lrmr/image.hpp"
#include "lrmr/irlsm.hpp"
#include "lrmr/measure.hpp"
#include "lrmr/random.hpp"
#include "oracles.hpp"

namespace lrmr::acceptance {
namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

double relative(const DenseMatrix& a, const DenseMatrix& b) {
  const double ref = b.norm();
  return ref > 0.0 ? (a - b).norm() / ref : (a - b).norm();
}

// Singular values from one-sided Jacobi, independent of the library SVD and
// accurate for tiny trailing values.
Vector jacobi_sigma(const DenseMatrix& X) { return Eigen::JacobiSVD<DenseMatrix>(X).singularValues(); }

// Solver runs shared between criteria.
struct Runs {
  struct Named {
    std::string label;
    SolverReport report;
    Index rank = 0;
  };
  std::vector<Named> monitored;  // criteria 1-4, checked by criterion 6
  std::vector<Named> all;        // every run, scanned by criterion 10
};

TrialSpec planted_spec(double kappa, double noise) {
  TrialSpec spec;
  spec.n = 100;
  spec.p = 100;
  spec.k = 5;
  spec.kappa = kappa;
  spec.noise_sigma = noise;
  spec.seed = 42;
  spec.solver.rank = 5;
  spec.solver.gamma = 1.0;
  return spec;
}

struct PlantedOutcome {
  double mean_error = 0.0;
  double worst_error = 0.0;
  int worst_iterations = 0;
  int failures = 0;
  int below_1e4 = 0;
  std::string first_error;
};

PlantedOutcome run_planted(const TrialSpec& spec, int trials, const std::string& tag, Runs& runs) {
  PlantedOutcome out;
  for (int t = 0; t < trials; ++t) {
    SolverReport rep;
    const TrialResult r = run_trial(spec, t, &rep);
    if (r.status != "ok") {
      ++out.failures;
      if (out.first_error.empty()) out.first_error = r.status;
      continue;
    }
    out.mean_error += r.rel_error / trials;
    out.worst_error = std::max(out.worst_error, r.rel_error);
    out.worst_iterations = std::max(out.worst_iterations, r.iterations);
    if (r.rel_error < 1e-4) ++out.below_1e4;
    Runs::Named named{fmt("%s trial %d", tag.c_str(), t), std::move(rep), spec.solver.rank};
    runs.monitored.push_back(named);
    runs.all.push_back(std::move(named));
  }
  return out;
}

CriterionResult exact_recovery(Runs& runs) {
  CriterionResult c{1, "exact recovery, noiseless completion", false, "", 0.0};
  const auto start = std::chrono::steady_clock::now();
  const PlantedOutcome o = run_planted(planted_spec(0.35, 0.0), 10, "noiseless", runs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.pass = o.failures == 0 && o.mean_error < 1e-4 && o.worst_iterations <= 200 && secs < 60.0;
  c.detail = fmt("mean rel error %.3e (< 1e-4), %d/10 trials below 1e-4, max iterations %d (<= 200), "
                 "%.1f s (< 60 s)",
                 o.mean_error, o.below_1e4, o.worst_iterations, secs);
  if (o.failures) c.detail += ", " + o.first_error;
  return c;
}

CriterionResult noisy_completion(Runs& runs) {
  CriterionResult c{2, "noisy completion", false, "", 0.0};
  const PlantedOutcome o = run_planted(planted_spec(0.5, 0.1), 10, "noisy", runs);
  c.pass = o.failures == 0 && o.mean_error < 0.15;
  c.detail = fmt("mean rel error %.4f (< 0.15), worst %.4f", o.mean_error, o.worst_error);
  if (o.failures) c.detail += ", " + o.first_error;
  return c;
}

CriterionResult image_completion(const Options& options, Runs& runs) {
  CriterionResult c{3, "image completion, cameraman", false, "", 0.0};
  const auto start = std::chrono::steady_clock::now();
  try {
    const GrayImage img = read_pgm_file(options.data_dir + "/cameraman.pgm");
    SolverConfig cfg;
    cfg.rank = 16;
    cfg.gamma = 1.0;
    auto res = complete_image_detailed(img, sample_pixels(img, 0.5, 7), cfg);
    const double err = rel_error(to_matrix(res.image), to_matrix(img));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.pass = err <= 0.16 && secs < 600.0;
    const Vector s = jacobi_sigma(to_matrix(img));
    const double best = s.tail(s.size() - 16).norm() / s.norm();
    c.detail = fmt("rel error %.4f (<= 0.16), best rank-16 %.4f, %d iterations, %.1f s (< 600 s)",
                   err, best, res.report.iterations, secs);
    Runs::Named named{"cameraman", std::move(res.report), 16};
    runs.monitored.push_back(named);
    runs.all.push_back(std::move(named));
  } catch (const std::exception& e) {
    c.detail = e.what();
  }
  return c;
}

CriterionResult path_equivalence(Runs& runs) {
  CriterionResult c{4, "Woodbury and dense paths agree", false, "", 0.0};
  double worst_final = 0.0, worst_iterate = 0.0;
  int mismatched_lengths = 0;
  for (int t = 0; t < 20; ++t) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(t);
    const DenseMatrix X = gen_lowrank(20, 20, 2, seed);
    const auto op = completion_op(20, 20, uniform_mask(20, 20, 0.4, seed));
    const Vector M = apply(op, X);
    SolverConfig cfg;
    cfg.rank = 2;
    cfg.keep_iterates = true;
    cfg.path = SolverPath::Woodbury;
    SolverReport wood = solve(op, M, cfg);
    cfg.path = SolverPath::Dense;
    SolverReport dense = solve(op, M, cfg);
    if (wood.iterates.size() != dense.iterates.size()) ++mismatched_lengths;
    const std::size_t len = std::min(wood.iterates.size(), dense.iterates.size());
    for (std::size_t l = 0; l < len; ++l)
      worst_iterate = std::max(worst_iterate, relative(wood.iterates[l], dense.iterates[l]));
    worst_final = std::max(worst_final, relative(wood.x_final, dense.x_final));
    wood.iterates.clear();
    dense.iterates.clear();
    for (auto* rep : {&wood, &dense}) {
      Runs::Named named{fmt("path problem %d (%s)", t, rep == &wood ? "woodbury" : "dense"),
                        std::move(*rep), 2};
      runs.monitored.push_back(named);
      runs.all.push_back(std::move(named));
    }
  }
  c.pass = mismatched_lengths == 0 && worst_final <= 1e-7 && worst_iterate <= 1e-7;
  c.detail = fmt("worst final rel diff %.2e, worst iterate rel diff %.2e (<= 1e-7), %d length mismatches",
                 worst_final, worst_iterate, mismatched_lengths);
  return c;
}

CriterionResult kkt_oracle() {
  CriterionResult c{5, "dense update matches KKT oracle", false, "", 0.0};
  Rng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(7));
    const Index p = 2 + static_cast<Index>(rng.below(7));
    const Index m = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::min<Index>(20, n * p - 1))));
    const auto op = gaussian_op(n, p, m, 7000 + static_cast<std::uint64_t>(t));
    const Vector M = oracle::gaussian(m, 1, rng);
    const double eps = std::exp(-3.0 + 3.0 * rng.uniform());
    WeightFactors W = WeightFactors::scaled_identity(n, eps);
    const Index r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    W.basis = oracle::random_orthogonal(n, rng).leftCols(r);
    W.sigma.resize(r);
    for (Index j = 0; j < r; ++j) W.sigma(j) = eps * (1.0 + 10.0 * rng.uniform()) + 1e-3;
    const DenseMatrix X = x_update_dense(op, M, W);
    const DenseMatrix ref = oracle::kkt_solve(op.coefficient_matrix(), W.dense(), M, n, p);
    worst = std::max(worst, relative(X, ref));
  }
  c.pass = worst <= 1e-8;
  c.detail = fmt("worst rel diff %.2e over 50 problems (<= 1e-8)", worst);
  return c;
}

CriterionResult monitors(const Runs& runs) {
  CriterionResult c{6, "monotonicity monitors on criteria 1-4 runs", false, "", 0.0};
  int failures = 0;
  std::string first;
  double worst_i = -kInfinity, worst_ii = -kInfinity, worst_iii = -kInfinity;
  for (const auto& run : runs.monitored) {
    const auto d = check_monotonicity(run.report);
    worst_i = std::max(worst_i, d.j_nonincreasing.worst);
    worst_ii = std::max(worst_ii, d.j_above_nuclear.worst);
    worst_iii = std::max(worst_iii, d.step_sum_bound.worst);
    if (!(d.j_nonincreasing.pass && d.j_above_nuclear.pass && d.step_sum_bound.pass)) {
      if (failures++ == 0) first = run.label;
    }
  }
  c.pass = failures == 0 && !runs.monitored.empty();
  c.detail = fmt("%zu runs, worst margins (i) %.2e (ii) %.2e (iii) %.2e, %d failing",
                 runs.monitored.size(), worst_i, worst_ii, worst_iii, failures);
  if (failures) c.detail += ", first: " + first;
  return c;
}

CriterionResult weight_optimality() {
  CriterionResult c{7, "stabilized weight minimizes J", false, "", 0.0};
  Rng rng(707);
  double worst = -kInfinity;
  int failures = 0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(6));
    const Index p = n + static_cast<Index>(rng.below(4));
    const DenseMatrix X = oracle::gaussian(n, p, rng);
    const double eps = std::exp(-3.0 + 4.0 * rng.uniform());
    const auto res = weight_optimality_check(X, eps, 100, 7700 + static_cast<std::uint64_t>(t));
    worst = std::max(worst, res.worst_gap);
    if (!res.pass) ++failures;
  }
  c.pass = failures == 0;
  c.detail = fmt("worst J(X, W_bar) - J(X, W) = %.3e (<= 1e-10), %d failing", worst, failures);
  return c;
}

CriterionResult gradient_check() {
  CriterionResult c{8, "gradient of J_eps matches finite differences", false, "", 0.0};
  Rng rng(808);
  double worst = 0.0;
  int checked = 0;
  while (checked < 20) {
    const DenseMatrix X = oracle::gaussian(6, 5, rng);
    const double eps = 0.2 + 2.0 * rng.uniform();
    const Vector s = jacobi_sigma(X);
    if (((s.array() - eps).abs() < 1e-3).any()) continue;
    const DenseMatrix G = grad_j_eps(X, eps);
    const DenseMatrix F = oracle::finite_difference_gradient(
        [&](const Eigen::MatrixXd& Y) { return j_eps(Y, eps); }, X, 1e-6);
    worst = std::max(worst, (G - F).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff());
    ++checked;
  }
  c.pass = worst < 1e-5;
  c.detail = fmt("worst relative error %.2e over 20 matrices (< 1e-5)", worst);
  return c;
}

CriterionResult appendix_oracles() {
  CriterionResult c{9, "Weyl, rearrangement and orthogonal additivity", false, "", 0.0};
  Rng rng(909);
  double weyl = -kInfinity, rearrange = -kInfinity, additive = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(6));
    const Index p = 2 + static_cast<Index>(rng.below(6));
    const DenseMatrix X = oracle::gaussian(n, p, rng);
    const DenseMatrix Y = X + std::pow(10.0, -4.0 * rng.uniform()) * oracle::gaussian(n, p, rng);
    const Vector sx = jacobi_sigma(X);
    const Vector sy = jacobi_sigma(Y);
    weyl = std::max(weyl, (sx - sy).cwiseAbs().maxCoeff() - (X - Y).norm());
  }
  for (int t = 0; t < 100; ++t) {
    const Index n = 3 + static_cast<Index>(rng.below(5));
    const Index p = 3 + static_cast<Index>(rng.below(5));
    const Index q = std::min(n, p);
    const DenseMatrix X = oracle::gaussian(n, p, rng);
    const DenseMatrix Y = oracle::gaussian(n, 2, rng) * oracle::gaussian(2, p, rng) +
                          0.1 * oracle::gaussian(n, p, rng);
    const Vector sx = jacobi_sigma(X);
    const Vector sy = jacobi_sigma(Y);
    const double diff = jacobi_sigma(X - Y).sum();
    const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(q)));
    const double tail_x = sx.tail(q - j).sum();
    const double tail_y = sy.tail(q - j).sum();
    rearrange = std::max(rearrange, std::abs(tail_x - tail_y) - diff);
    for (Index J = j + 1; J <= q; ++J)
      rearrange = std::max(rearrange, static_cast<double>(J - j) * sx(J - 1) - (diff + tail_y));
  }
  for (int t = 0; t < 100; ++t) {
    const Index n = 4 + static_cast<Index>(rng.below(4));
    const Index p = n + static_cast<Index>(rng.below(3));
    const Index a = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const DenseMatrix P = oracle::random_orthogonal(n, rng);
    const DenseMatrix Q = oracle::random_orthogonal(p, rng);
    const DenseMatrix X = P.leftCols(a) * oracle::gaussian(a, a, rng) * Q.leftCols(a).transpose();
    const DenseMatrix Z =
        P.rightCols(n - a) * oracle::gaussian(n - a, n - a, rng) * Q.middleCols(a, n - a).transpose();
    const double sum = jacobi_sigma(X).sum() + jacobi_sigma(Z).sum();
    additive = std::max(additive, std::abs(jacobi_sigma(X + Z).sum() - sum) / sum);
  }
  c.pass = weyl <= 1e-9 && rearrange <= 1e-9 && additive <= 1e-9;
  c.detail = fmt("worst margins: Weyl %.2e, rearrangement %.2e (<= 1e-9), additivity rel %.2e (<= 1e-9)",
                 weyl, rearrange, additive);
  return c;
}

CriterionResult rank_certificate(Runs& runs) {
  CriterionResult c{10, "rank certificate at eps = 0", false, "", 0.0};
  // Noiseless planted runs in the regime where eps reaches zero.
  for (int t = 0; t < 3; ++t) {
    SolverReport rep;
    const TrialResult r = run_trial(planted_spec(0.5, 0.0), t, &rep);
    if (r.status == "ok") runs.all.push_back({fmt("kappa 0.5 trial %d", t), std::move(rep), 5});
  }
  // Observing K full rows plus a random half of the rest makes the rank-K
  // interpolant reachable in a few steps.
  {
    const Index n = 30, p = 40, K = 3;
    const DenseMatrix X = gen_lowrank(n, p, K, 31);
    std::vector<Entry> entries;
    Rng rng(32);
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < n; ++i)
        if (i < K || rng.uniform() < 0.5) entries.push_back({i, j});
    const auto op = completion_op(n, p, entries);
    SolverConfig cfg;
    cfg.rank = K;
    runs.all.push_back({"row-anchored instance", solve(op, apply(op, X), cfg), K});
  }
  int zero_runs = 0, failures = 0;
  double worst = 0.0;
  for (const auto& run : runs.all) {
    if (run.report.stop_reason != StopReason::EpsZero) continue;
    ++zero_runs;
    const Vector s = jacobi_sigma(run.report.x_final);
    const double ratio = s(run.rank) / s(0);
    worst = std::max(worst, ratio);
    if (!(ratio < 1e-10)) ++failures;
  }
  c.pass = zero_runs > 0 && failures == 0;
  c.detail = fmt("%d runs ended with eps = 0, worst sigma_{K+1}/sigma_1 %.2e (< 1e-10)", zero_runs,
                 worst);
  return c;
}

CriterionResult theory_formulas() {
  CriterionResult c{11, "theory formulas", false, "", 0.0};
  const double root = std::sqrt(2.0) - 1.0;
  const double eta_err = std::abs(eta_from_rip(root, root) - 1.0);
  bool collapse = true;
  const std::pair<Index, Index> pairs[] = {{2, 1}, {6, 5}, {9, 5}, {10, 5}, {20, 3}};
  for (auto [K, k] : pairs)
    collapse = collapse && lambda_bound(0.0, K, k) == 4.0 / static_cast<double>(K - k) + 2.0;
  const double lam_err = std::abs(lambda_bound(0.2, 10, 5) - 5.5);
  c.pass = eta_err <= 1e-12 && collapse && lam_err <= 1e-12;
  c.detail = fmt("|eta - 1| = %.1e, eta = 0 collapse %s on 5 pairs, |Lambda(0.2, 10, 5) - 5.5| = %.1e",
                 eta_err, collapse ? "exact" : "inexact", lam_err);
  return c;
}

CriterionResult two_by_two() {
  CriterionResult c{12, "2x2 completion matches nuclear-norm scan", false, "", 0.0};
  const std::vector<Entry> e{{0, 0}, {1, 0}, {0, 1}};
  const auto op = completion_op(2, 2, e);
  const Vector M = Vector::Ones(3);
  SolverConfig cfg;
  cfg.rank = 1;
  // The missing entry after l iterations is 1 - 2/(l + 1); 1e-6 needs about
  // two million iterations.
  cfg.max_iter = 2'500'000;
  cfg.eps_stall_tol = 0.0;
  cfg.record_trace = false;
  const SolverReport rep = solve(op, M, cfg);
  const double scan = oracle::scan_argmin_2x2(-5.0, 5.0, 1e-4);
  const double got = rep.x_final(1, 1);
  c.pass = std::abs(got - scan) <= 1e-6;
  c.detail = fmt("entry %.9f, scan argmin %.9f, diff %.2e (<= 1e-6), %d iterations", got, scan,
                 std::abs(got - scan), rep.iterations);
  return c;
}

}  // namespace

std::string format_line(const CriterionResult& r) {
  return fmt("criterion %2d %s: %s (%s; %.1f s)", r.id, r.pass ? "PASS" : "FAIL", r.name.c_str(),
             r.detail.c_str(), r.seconds);
}

std::vector<CriterionResult> run_acceptance(const Options& options, std::ostream* log) {
  Runs runs;
  std::vector<CriterionResult> results;
  const auto run = [&](int id, const char* name, const std::function<CriterionResult()>& f) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r{id, name, false, "", 0.0};
    try {
      r = f();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (log) *log << format_line(r) << std::endl;
    results.push_back(r);
  };
  run(1, "exact recovery, noiseless completion", [&] { return exact_recovery(runs); });
  run(2, "noisy completion", [&] { return noisy_completion(runs); });
  run(3, "image completion, cameraman", [&] { return image_completion(options, runs); });
  run(4, "Woodbury and dense paths agree", [&] { return path_equivalence(runs); });
  run(5, "dense update matches KKT oracle", kkt_oracle);
  run(6, "monotonicity monitors on criteria 1-4 runs", [&] { return monitors(runs); });
  run(7, "stabilized weight minimizes J", weight_optimality);
  run(8, "gradient of J_eps matches finite differences", gradient_check);
  run(9, "Weyl, rearrangement and orthogonal additivity", appendix_oracles);
  run(10, "rank certificate at eps = 0", [&] { return rank_certificate(runs); });
  run(11, "theory formulas", theory_formulas);
  run(12, "2x2 completion matches nuclear-norm scan", two_by_two);
  return results;
}

}  // namespace lrmr::acceptance
