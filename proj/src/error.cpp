#include "qmframe/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace qmframe {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidRange: return "invalid-range";
    case ErrorKind::TooFewPoints: return "n-too-small";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::NonHermitian: return "non-hermitian-input";
    case ErrorKind::SingularTime: return "singular-time";
    case ErrorKind::NegativeIndex: return "negative-n";
    case ErrorKind::OutsideGrid: return "Q-outside-grid";
    case ErrorKind::UnsupportedCombination: return "unsupported-combination";
    case ErrorKind::NonQuadratic: return "non-quadratic-W";
    case ErrorKind::DegenerateHessian: return "degenerate-hessian";
    case ErrorKind::UnknownCheck: return "unknown-check";
    case ErrorKind::ConfigParse: return "config-parse-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  return std::exchange(handler(), std::move(h));
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

}  // namespace qmframe
