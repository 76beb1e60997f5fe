#pragma once

// Acceptance criteria for the recovery toolkit. Shared by the acceptance
// test binary and `lrmr check`.

#include <iosfwd>
#include <string>
#include <vector>

namespace lrmr::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Directory holding cameraman.pgm.
  std::string data_dir;
};

/// Runs every criterion in order. When `log` is set, one line per
/// criterion is written to it as soon as that criterion finishes.
std::vector<CriterionResult> run_acceptance(const Options& options, std::ostream* log);

std::string format_line(const CriterionResult& r);

}  // namespace lrmr::acceptance
