#pragma once

#include <array>
#include <cmath>
#include <string>

#include "error.hpp"

namespace hk {

using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a, int d) { return dot(a, a, d); }
inline double norm(const Vec& a, int d) { return std::sqrt(norm2(a, d)); }

// <x> = sqrt(1 + |x|^2)
inline double japanese(const Vec& a, int d) { return std::sqrt(1.0 + norm2(a, d)); }

inline Vec axpy(double s, const Vec& a, const Vec& b) {
  return {b[0] + s * a[0], b[1] + s * a[1], b[2] + s * a[2]};
}

inline Vec scaled(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }

struct PhaseState {
  int dim = 1;
  Vec x{0.0, 0.0, 0.0};
  Vec v{0.0, 0.0, 0.0};
  double t = 0.0;
  bool alive = true;  // false once absorbed by a wall

  // Phase coordinate i: 0..dim-1 are positions, dim..2dim-1 velocities.
  double coord(int i) const { return i < dim ? x[i] : v[i - dim]; }
  double& coord(int i) { return i < dim ? x[i] : v[i - dim]; }

  bool operator==(const PhaseState&) const = default;
};

inline PhaseState make_state(int dim, const Vec& x, const Vec& v, double t = 0.0) {
  require(dim >= 1 && dim <= 3, "dimension must be 1, 2 or 3");
  PhaseState s;
  s.dim = dim;
  s.x = x;
  s.v = v;
  s.t = t;
  return s;
}

inline bool finite_state(const PhaseState& s) {
  for (int i = 0; i < s.dim; ++i)
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.v[i])) return false;
  return std::isfinite(s.t);
}

}  // namespace hk
