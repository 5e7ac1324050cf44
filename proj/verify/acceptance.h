// Acceptance checks, one per criterion, shared by the acceptance binary and
// `oqa verify`.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace oqa::verify {

enum class Scale { kFull, kQuick };

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

// Runs every criterion in order. Informational notes (not criteria) are
// written to `notes` when given.
std::vector<CriterionResult> RunAcceptance(Scale scale,
                                           std::ostream* notes = nullptr);

// `PASS [n] title: detail (x.xs)` or `FAIL ...`.
void PrintResult(std::ostream& out, const CriterionResult& result);

}  // namespace oqa::verify
