// SPDX-License-Identifier: MIT
// Scalar wrapper that counts floating point additions, subtractions, multiplications and divisions.
// Negation, abs and max are free, matching the cost model.
#pragma once

#include <cmath>
#include <cstdint>

namespace insdg {

struct FlopCounter {
  static inline std::uint64_t count = 0;
  static void reset() { count = 0; }
};

struct Counted {
  double v = 0.0;

  Counted() = default;
  Counted(double x) : v(x) {}  // NOLINT(google-explicit-constructor)

  Counted& operator+=(const Counted& o) { ++FlopCounter::count; v += o.v; return *this; }
  Counted& operator-=(const Counted& o) { ++FlopCounter::count; v -= o.v; return *this; }
  Counted& operator*=(const Counted& o) { ++FlopCounter::count; v *= o.v; return *this; }
  Counted& operator/=(const Counted& o) { ++FlopCounter::count; v /= o.v; return *this; }
};

inline Counted operator+(Counted a, const Counted& b) { return a += b; }
inline Counted operator-(Counted a, const Counted& b) { return a -= b; }
inline Counted operator*(Counted a, const Counted& b) { return a *= b; }
inline Counted operator/(Counted a, const Counted& b) { return a /= b; }
inline Counted operator-(const Counted& a) { return Counted(-a.v); }
inline bool operator<(const Counted& a, const Counted& b) { return a.v < b.v; }
inline bool operator>(const Counted& a, const Counted& b) { return a.v > b.v; }
inline Counted abs(const Counted& a) { return Counted(std::abs(a.v)); }

inline double value_of(double x) { return x; }
inline double value_of(const Counted& x) { return x.v; }

}  // namespace insdg
