#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmframe/error.hpp"

namespace qmframe::test {

// Kind of the qmframe::Error thrown by f, or nullopt if nothing was thrown.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

struct CaptureWarnings {
  std::vector<std::string> messages;
  WarningHandler previous;

  CaptureWarnings() {
    previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~CaptureWarnings() { set_warning_handler(std::move(previous)); }
  CaptureWarnings(const CaptureWarnings&) = delete;
  CaptureWarnings& operator=(const CaptureWarnings&) = delete;
};

}  // namespace qmframe::test
