#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qmframe {

// Outcome of one numerical identity check: a non-negative residual compared
// against a pinned tolerance. passed == (residual <= tolerance); NaN fails.
struct CheckResult {
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string note;
  std::vector<std::pair<std::string, std::string>> metadata;

  CheckResult& with(std::string key, std::string value) {
    metadata.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  CheckResult& with(std::string key, double value);
};

CheckResult make_result(double residual, double tolerance);
CheckResult skipped_result(std::string note);

// Round-trippable decimal form (17 significant digits) used in metadata and CSV.
std::string format_double(double value);

}  // namespace qmframe
