#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qmframe {

enum class ErrorKind {
  InvalidRange,
  TooFewPoints,
  GridMismatch,
  NonHermitian,
  SingularTime,
  NegativeIndex,
  OutsideGrid,
  UnsupportedCombination,
  NonQuadratic,
  DegenerateHessian,
  UnknownCheck,
  ConfigParse,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-fatal diagnostics (boundary support, caustic proximity). The default
// handler writes to stderr; tests install their own to capture messages.
using WarningHandler = std::function<void(std::string_view)>;

WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace qmframe
