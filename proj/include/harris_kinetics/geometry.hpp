#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "error.hpp"
#include "phase.hpp"
#include "rng.hpp"

namespace hk {

// Bounded spatial domain for free-transport models: interval, disk (centred at origin) or box.
struct Geometry {
  enum class Kind { interval, disk, box };

  Kind kind = Kind::interval;
  int dim = 1;
  double radius = 1.0;
  Vec lo{0.0, 0.0, 0.0};
  Vec hi{1.0, 1.0, 1.0};

  static constexpr double on_boundary_tol = 1e-12;

  static Geometry interval(double a = 0.0, double b = 1.0) {
    require(b > a, "interval requires b > a");
    Geometry g;
    g.kind = Kind::interval;
    g.dim = 1;
    g.lo = {a, 0.0, 0.0};
    g.hi = {b, 0.0, 0.0};
    return g;
  }
  static Geometry disk(double radius = 1.0) {
    require(radius > 0.0, "disk radius must be > 0");
    Geometry g;
    g.kind = Kind::disk;
    g.dim = 2;
    g.radius = radius;
    return g;
  }
  static Geometry box(int dim, const Vec& lo, const Vec& hi) {
    require(dim == 2 || dim == 3, "box geometry requires d = 2 or 3");
    for (int i = 0; i < dim; ++i) require(hi[i] > lo[i], "box requires hi > lo");
    Geometry g;
    g.kind = Kind::box;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    return g;
  }

  double scale() const { return kind == Kind::disk ? radius : 1.0; }

  bool contains(const Vec& x) const {
    const double tol = on_boundary_tol * scale();
    if (kind == Kind::disk) return norm(x, 2) <= radius * (1.0 + on_boundary_tol);
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
    return true;
  }

  double diameter() const {
    if (kind == Kind::disk) return 2.0 * radius;
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
  }

  double volume() const {
    if (kind == Kind::disk) return M_PI * radius * radius;
    double s = 1.0;
    for (int i = 0; i < dim; ++i) s *= hi[i] - lo[i];
    return s;
  }

  // Outward unit normal at a boundary point (nearest face for boxes).
  Vec normal(const Vec& x) const {
    Vec n{0.0, 0.0, 0.0};
    if (kind == Kind::disk) {
      const double r = norm(x, 2);
      n[0] = x[0] / r;
      n[1] = x[1] / r;
      return n;
    }
    int best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (int i = 0; i < dim; ++i) {
      const double gl = std::abs(x[i] - lo[i]), gh = std::abs(hi[i] - x[i]);
      if (gl < best_gap) best_gap = gl, best = i, sign = -1.0;
      if (gh < best_gap) best_gap = gh, best = i, sign = 1.0;
    }
    n[best] = sign;
    return n;
  }

  bool on_boundary(const Vec& x) const {
    const double tol = on_boundary_tol * scale();
    if (kind == Kind::disk) return std::abs(norm(x, 2) - radius) <= tol * 10.0;
    for (int i = 0; i < dim; ++i)
      if (std::abs(x[i] - lo[i]) <= tol || std::abs(hi[i] - x[i]) <= tol) return true;
    return false;
  }

  // Pull a point that should lie on the boundary exactly onto it.
  Vec project_to_boundary(const Vec& x, const Vec& n) const {
    Vec p = x;
    if (kind == Kind::disk) {
      const double r = norm(x, 2);
      p[0] = x[0] * radius / r;
      p[1] = x[1] * radius / r;
      return p;
    }
    for (int i = 0; i < dim; ++i) {
      if (n[i] > 0.5) p[i] = hi[i];
      if (n[i] < -0.5) p[i] = lo[i];
      p[i] = std::clamp(p[i], lo[i], hi[i]);
    }
    return p;
  }

  Vec sample_uniform(RngStream& rng) const {
    Vec x{0.0, 0.0, 0.0};
    if (kind == Kind::disk) {
      const double r = radius * std::sqrt(rng.uniform());
      const double th = 2.0 * M_PI * rng.uniform();
      x[0] = r * std::cos(th);
      x[1] = r * std::sin(th);
      return x;
    }
    for (int i = 0; i < dim; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
    return x;
  }
};

// First time the ray x + t v meets the boundary; 0 for outgoing or grazing boundary states.
inline double first_collision_time(const Vec& x, const Vec& v, const Geometry& g) {
  const int d = g.dim;
  if (!g.contains(x)) {
    std::ostringstream os;
    os << "position outside the domain";
    throw invalid_input(os.str());
  }
  const double inf = std::numeric_limits<double>::infinity();
  if (g.kind == Geometry::Kind::disk) {
    const double a = norm2(v, 2);
    if (a == 0.0) return g.on_boundary(x) ? 0.0 : inf;
    const double b = dot(x, v, 2);
    const double c = norm2(x, 2) - g.radius * g.radius;
    if (g.on_boundary(x)) return b < 0.0 ? -2.0 * b / a : 0.0;
    const double disc = std::max(b * b - a * c, 0.0);
    const double sq = std::sqrt(disc);
    if (b <= 0.0) return (-b + sq) / a;
    return std::max(-c, 0.0) / (b + sq);
  }
  double t = inf;
  const double tol = Geometry::on_boundary_tol * g.scale();
  for (int i = 0; i < d; ++i) {
    if (v[i] > 0.0) {
      if (g.hi[i] - x[i] <= tol) return 0.0;
      t = std::min(t, (g.hi[i] - x[i]) / v[i]);
    } else if (v[i] < 0.0) {
      if (x[i] - g.lo[i] <= tol) return 0.0;
      t = std::min(t, (g.lo[i] - x[i]) / v[i]);
    } else if (g.hi[i] - x[i] <= tol || x[i] - g.lo[i] <= tol) {
      return 0.0;
    }
  }
  return t;
}

}  // namespace hk
