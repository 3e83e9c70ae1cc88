// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <span>

#include "insdg/common.hpp"

namespace insdg {

// nodal coefficients, element-major (K x Np)
struct ScalarField {
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(dlong n, double v = 0.0) : values(static_cast<size_t>(n), v) {}
  explicit ScalarField(std::vector<double> v) : values(std::move(v)) {}

  dlong size() const { return static_cast<dlong>(values.size()); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
  double& operator[](dlong i) { return values[static_cast<size_t>(i)]; }
  double operator[](dlong i) const { return values[static_cast<size_t>(i)]; }
  std::span<double> span() { return values; }
  std::span<const double> span() const { return values; }
};

struct VectorField {
  ScalarField u, v;

  VectorField() = default;
  explicit VectorField(dlong n) : u(n), v(n) {}
  VectorField(ScalarField a, ScalarField b) : u(std::move(a)), v(std::move(b)) {}
  dlong size() const { return u.size(); }
};

inline void check_same(const ScalarField& a, const ScalarField& b) {
  if (a.size() != b.size()) throw ShapeError("field size mismatch");
}

// y = a x + b y
inline void axpby(double a, const ScalarField& x, double b, ScalarField& y) {
  check_same(x, y);
  for (dlong i = 0; i < x.size(); ++i) y[i] = a * x[i] + b * y[i];
}

inline void axpby(double a, const VectorField& x, double b, VectorField& y) {
  axpby(a, x.u, b, y.u);
  axpby(a, x.v, b, y.v);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
inline double dot(const ScalarField& a, const ScalarField& b) { return dot(a.span(), b.span()); }
inline double norm2(const ScalarField& a) { return norm2(a.span()); }

inline bool all_finite(const ScalarField& f) {
  for (double x : f.values)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace insdg
