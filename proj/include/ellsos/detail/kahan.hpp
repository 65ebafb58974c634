#pragma once

#include <complex>

namespace ellsos::detail {

// Kahan-compensated accumulator.  Long alternating permutation sums are added
// in a fixed (lexicographic) order with compensation so results are both
// accurate and bit-reproducible.
template <typename T>
struct KahanSum {
  T sum{};
  T comp{};

  void add(const T& v) {
    const T y = v - comp;
    const T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  const T& value() const noexcept { return sum; }
};

}  // namespace ellsos::detail
