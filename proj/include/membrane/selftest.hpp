#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace membrane {

struct SelftestResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Small closed-form checks of every module, a few seconds in total.
std::vector<SelftestResult> run_selftest();

/// Prints one `PASS|FAIL name: detail` line per check; true if all passed.
bool print_selftest(const std::vector<SelftestResult>& results, std::ostream& out);

}  // namespace membrane
