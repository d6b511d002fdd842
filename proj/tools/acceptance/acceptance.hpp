#pragma once

// The numbered acceptance criteria, each evaluated at its stated tolerance.

#include <iosfwd>
#include <string>
#include <vector>

namespace catsim::acceptance {

struct Options {
  // Multiplies every tolerance; values below 1 tighten the suite.
  double tolerance_scale = 1.0;
  // Criterion ids to run; empty runs all.
  std::vector<int> only;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::string> checks;  // one line per measured quantity
  std::vector<std::string> notes;
  double seconds = 0.0;
};

std::vector<CriterionResult> run(const Options& options);

bool all_passed(const std::vector<CriterionResult>& results);

/// One "PASS"/"FAIL" line per criterion.
void print_summary(std::ostream& os, const std::vector<CriterionResult>& results);

/// Summary lines followed by every measured value and note.
void print_report(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace catsim::acceptance
