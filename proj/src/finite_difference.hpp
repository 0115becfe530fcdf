#pragma once

// Three-point central differences, O(h^2).

namespace qmframe::detail {

template <class F>
auto central_first(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
auto central_second(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace qmframe::detail
