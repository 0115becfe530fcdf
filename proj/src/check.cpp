#include "qmframe/check.hpp"

#include <cmath>
#include <cstdio>

namespace qmframe {

CheckResult& CheckResult::with(std::string key, double value) {
  return with(std::move(key), format_double(value));
}

CheckResult make_result(double residual, double tolerance) {
  CheckResult r;
  r.residual = residual;
  r.tolerance = tolerance;
  r.passed = !std::isnan(residual) && residual >= 0.0 && residual <= tolerance;
  return r;
}

CheckResult skipped_result(std::string note) {
  CheckResult r;
  r.residual = std::nan("");
  r.skipped = true;
  r.note = std::move(note);
  return r;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace qmframe
