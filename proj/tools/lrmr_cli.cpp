// lrmr: command-line front end for low-rank matrix recovery.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrmr/analysis.hpp"
#include "lrmr/bench.hpp"
#include "lrmr/errors.hpp"
#include "lrmr/image.hpp"
#include "lrmr/irlsm.hpp"
#include "lrmr/measure.hpp"
#include "suite.hpp"

namespace {

struct SolverFlags {
  lrmr::Index rank = 1;
  double gamma = 1.0;
  int max_iter = 200;
  double eps_tol = 1e-6;
  int eps_stall = 50;
  int threads = 1;

  void attach(CLI::App* app) {
    app->add_option("-K,--rank", rank, "Rank input K")->required();
    app->add_option("--gamma", gamma, "Step factor in the eps update")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
    app->add_option("--eps-tol", eps_tol, "Relative eps change counted as a stall")
        ->capture_default_str();
    app->add_option("--eps-stall", eps_stall, "Stalled iterations before stopping")
        ->capture_default_str();
    app->add_option("--threads", threads, "Threads for the column updates")->capture_default_str();
  }

  lrmr::SolverConfig config() const {
    lrmr::SolverConfig cfg;
    cfg.rank = rank;
    cfg.gamma = gamma;
    cfg.max_iter = max_iter;
    cfg.eps_stall_tol = eps_tol;
    cfg.eps_stall_len = eps_stall;
    cfg.threads = threads;
    return cfg;
  }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lrmr::FormatError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lrmr::FormatError("cannot write " + path);
  return out;
}

void print_report(const lrmr::SolverReport& rep) {
  std::fprintf(stderr, "iterations %d, stop %s, final eps %.6g\n", rep.iterations,
               std::string(lrmr::to_string(rep.stop_reason)).c_str(), rep.trace.back().eps);
}

int cmd_solve(const std::string& mask_path, const std::string& values_path,
              const SolverFlags& flags, const std::string& out_path) {
  auto mask_in = open_in(mask_path);
  const lrmr::MaskFile mask = lrmr::read_mask(mask_in);
  auto values_in = open_in(values_path);
  const std::vector<double> values = lrmr::read_values(values_in);
  if (values.size() != mask.entries.size()) {
    throw lrmr::InvalidArgument("values file has " + std::to_string(values.size()) +
                                " entries, mask has " + std::to_string(mask.entries.size()));
  }
  const auto op = lrmr::completion_op(mask.n, mask.p, mask.entries);
  // Measurements are ordered by column block; the mask file need not be.
  lrmr::DenseMatrix data = lrmr::DenseMatrix::Zero(mask.n, mask.p);
  for (std::size_t a = 0; a < values.size(); ++a)
    data(mask.entries[a].row, mask.entries[a].col) = values[a];
  const lrmr::SolverReport rep = lrmr::solve(op, lrmr::apply(op, data), flags.config());
  print_report(rep);
  if (out_path.empty()) {
    lrmr::write_matrix_text(std::cout, rep.x_final);
  } else {
    auto out = open_out(out_path);
    lrmr::write_matrix_text(out, rep.x_final);
  }
  return 0;
}

struct SynthFlags {
  std::vector<double> fractions{0.35};
  std::vector<lrmr::Index> ranks{5};
  lrmr::Index n = 100;
  lrmr::Index p = 100;
  double noise = 0.0;
  int trials = 10;
  std::uint64_t seed = 1;
  bool paper_scale = false;
  int jobs = 1;
};

int cmd_synth(const SynthFlags& s, const SolverFlags& flags, bool rank_given,
              const std::string& out_path) {
  std::vector<lrmr::TrialSpec> specs;
  for (const lrmr::Index k : s.ranks) {
    for (const double kappa : s.fractions) {
      lrmr::TrialSpec spec;
      spec.n = s.paper_scale ? 500 : s.n;
      spec.p = s.paper_scale ? 500 : s.p;
      spec.k = k;
      spec.kappa = kappa;
      spec.noise_sigma = s.noise;
      spec.seed = s.seed;
      spec.solver = flags.config();
      if (!rank_given) spec.solver.rank = k;
      spec.validate();
      spec.solver.validate(spec.n, spec.p);
      specs.push_back(spec);
    }
  }
  const lrmr::GridResult grid = lrmr::run_grid(specs, s.trials, s.jobs);
  if (out_path.empty()) {
    lrmr::write_csv(std::cout, grid);
  } else {
    auto out = open_out(out_path);
    lrmr::write_csv(out, grid);
  }
  return 0;
}

int cmd_image(const std::string& in_path, double fraction, const std::string& mask_path,
              std::uint64_t seed, const SolverFlags& flags, const std::string& out_path) {
  const lrmr::GrayImage img = lrmr::read_pgm_file(in_path);
  std::vector<lrmr::Entry> mask;
  if (!mask_path.empty()) {
    auto in = open_in(mask_path);
    lrmr::MaskFile m = lrmr::read_mask(in);
    if (m.n != img.height || m.p != img.width)
      throw lrmr::InvalidArgument("mask shape does not match the image");
    mask = std::move(m.entries);
  } else {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw lrmr::InvalidArgument("--fraction must lie in (0, 1]");
    mask = lrmr::sample_pixels(img, fraction, seed);
  }
  const auto res = lrmr::complete_image_detailed(img, mask, flags.config());
  print_report(res.report);
  std::fprintf(stderr, "relative error vs input %.6f\n",
               lrmr::rel_error(lrmr::to_matrix(res.image), lrmr::to_matrix(img)));
  lrmr::write_pgm_file(out_path, res.image);
  return 0;
}

int cmd_theory(const lrmr::GuaranteeInputs& in, bool csv) {
  const lrmr::GuaranteeReport rep = lrmr::guarantee_report(in);
  const double threshold = in.K > 2 ? 1.0 - 2.0 / static_cast<double>(in.K - 2) : -1.0;
  if (csv) {
    std::printf("delta3k,delta4k,K,k,eta,eta_below_one,convergence_regime,lambda\n");
    std::printf("%.10g,%.10g,%td,%td,%.10g,%d,%d,", in.delta_3k, in.delta_4k, in.K, in.k, rep.eta,
                rep.eta_below_one ? 1 : 0, rep.convergence_regime ? 1 : 0);
    if (rep.lambda) std::printf("%.10g", *rep.lambda);
    std::printf("\n");
    return 0;
  }
  std::printf("eta = %.10g\n", rep.eta);
  std::printf("eta < 1: %s\n", rep.eta_below_one ? "yes" : "no");
  if (in.K > 2) {
    std::printf("eta < 1 - 2/(K-2) = %.10g: %s\n", threshold, rep.convergence_regime ? "yes" : "no");
  } else {
    std::printf("eta < 1 - 2/(K-2): no (needs K > 2)\n");
  }
  if (rep.lambda) {
    std::printf("Lambda = %.10g\n", *rep.lambda);
  } else {
    std::printf("Lambda: undefined (needs eta < 1 and k < K - 2 eta/(1 - eta))\n");
  }
  return 0;
}

int cmd_check(const std::string& data_dir) {
  lrmr::acceptance::Options options;
  options.data_dir = data_dir;
  const auto results = lrmr::acceptance::run_acceptance(options, &std::cout);
  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix recovery by iteratively reweighted least squares"};
  app.require_subcommand(1);

  SolverFlags solver_flags;
  std::string out_path;

  auto* solve = app.add_subcommand("solve", "Complete a matrix from a mask file and values file");
  std::string mask_path, values_path;
  solve->add_option("mask", mask_path, "Mask file (header \"n p\", then \"row col\" lines)")
      ->required();
  solve->add_option("values", values_path, "Values file, one real per mask line")->required();
  solve->add_option("--out", out_path, "Output matrix file (default stdout)");
  solver_flags.attach(solve);

  auto* synth = app.add_subcommand("synth", "Planted low-rank trials written as CSV");
  SynthFlags synth_flags;
  SolverFlags synth_solver;
  synth->add_option("--fraction", synth_flags.fractions, "Sampling fractions kappa")
      ->capture_default_str();
  synth->add_option("--k", synth_flags.ranks, "Planted ranks")->capture_default_str();
  synth->add_option("--n", synth_flags.n, "Rows")->capture_default_str();
  synth->add_option("--p", synth_flags.p, "Columns")->capture_default_str();
  synth->add_option("--noise", synth_flags.noise, "Noise standard deviation")->capture_default_str();
  synth->add_option("--trials", synth_flags.trials, "Trials per spec")->capture_default_str();
  synth->add_option("--seed", synth_flags.seed, "Seed")->capture_default_str();
  synth->add_option("--jobs", synth_flags.jobs, "Trials run concurrently")->capture_default_str();
  synth->add_flag("--paper-scale", synth_flags.paper_scale, "Use n = p = 500");
  synth->add_option("--out", out_path, "CSV file (default stdout)");
  // K defaults to the planted rank for synth.
  auto* synth_rank = synth->add_option("-K,--rank", synth_solver.rank, "Rank input K (default k)");
  synth->add_option("--gamma", synth_solver.gamma)->capture_default_str();
  synth->add_option("--max-iter", synth_solver.max_iter)->capture_default_str();
  synth->add_option("--eps-tol", synth_solver.eps_tol)->capture_default_str();
  synth->add_option("--eps-stall", synth_solver.eps_stall)->capture_default_str();

  auto* image = app.add_subcommand("image", "Complete a PGM image from a pixel sample");
  std::string image_in, image_mask;
  double fraction = 0.5;
  std::uint64_t seed = 1;
  image->add_option("input", image_in, "Input PGM (P5 or P2)")->required();
  auto* frac_opt = image->add_option("--fraction", fraction, "Fraction of pixels observed")
                       ->capture_default_str();
  image->add_option("--mask", image_mask, "Mask file instead of random sampling")
      ->excludes(frac_opt);
  image->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  image->add_option("--out", out_path, "Output PGM")->required();
  SolverFlags image_flags;
  image_flags.attach(image);

  auto* theory = app.add_subcommand("theory", "Recovery constants from RIP constants");
  lrmr::GuaranteeInputs gin;
  bool csv = false;
  theory->add_option("--delta3k", gin.delta_3k, "delta_3k")->required();
  theory->add_option("--delta4k", gin.delta_4k, "delta_4k")->required();
  theory->add_option("--K", gin.K, "Rank input K")->required();
  theory->add_option("--k", gin.k, "Target rank k")->required();
  theory->add_flag("--csv", csv, "CSV output");

  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  std::string data_dir = LRMR_DATA_DIR;
  check->add_option("--data-dir", data_dir, "Directory with cameraman.pgm")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*solve) return cmd_solve(mask_path, values_path, solver_flags, out_path);
    if (*synth) return cmd_synth(synth_flags, synth_solver, synth_rank->count() > 0, out_path);
    if (*image) return cmd_image(image_in, fraction, image_mask, seed, image_flags, out_path);
    if (*theory) return cmd_theory(gin, csv);
    if (*check) return cmd_check(data_dir);
  } catch (const lrmr::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lrmr::OutOfRegime& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
