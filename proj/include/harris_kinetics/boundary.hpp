#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>

#include "error.hpp"
#include "phase.hpp"
#include "rng.hpp"

namespace hk {

struct MaxwellWall {
  std::function<double(const Vec&)> accommodation = [](const Vec&) { return 1.0; };
};

struct CercignaniLampisWall {
  double r_perp = 1.0;
  double r_par = 1.0;
};

struct AbsorbingWall {};

struct DiffuseWall {};

using BoundarySpec = std::variant<MaxwellWall, CercignaniLampisWall, AbsorbingWall, DiffuseWall>;

inline std::string boundary_name(const BoundarySpec& b) {
  struct V {
    std::string operator()(const MaxwellWall&) const { return "maxwell"; }
    std::string operator()(const CercignaniLampisWall&) const { return "cercignani_lampis"; }
    std::string operator()(const AbsorbingWall&) const { return "absorbing"; }
    std::string operator()(const DiffuseWall&) const { return "diffuse"; }
  };
  return std::visit(V{}, b);
}

inline void validate(const CercignaniLampisWall& w) {
  require(w.r_perp > 0.0 && w.r_perp <= 1.0, "r_perp must lie in (0,1]");
  require(w.r_par > 0.0 && w.r_par < 2.0, "r_par must lie in (0,2)");
}

inline Vec specular(const Vec& u, const Vec& n, int d) {
  const double un = dot(u, n, d);
  return axpy(-2.0 * un, n, u);
}

namespace detail {

// Isotropic Gaussian with per-component variance var, projected onto the plane orthogonal to n.
inline Vec tangential_gaussian(const Vec& n, int d, double var, RngStream& rng) {
  Vec g{0.0, 0.0, 0.0};
  const double s = std::sqrt(var);
  for (int i = 0; i < d; ++i) g[i] = s * rng.normal();
  const double gn = dot(g, n, d);
  return axpy(-gn, n, g);
}

}  // namespace detail

// Re-emission from the wall Maxwellian flux: normal speed Rayleigh(sqrt T), tangential N(0, T).
inline Vec sample_diffuse(const Vec& n, int d, double T, RngStream& rng) {
  const double s = std::sqrt(-2.0 * T * std::log(rng.uniform()));
  Vec v = detail::tangential_gaussian(n, d, T, rng);
  return axpy(-s, n, v);
}

inline Vec sample_maxwell_boundary(const Vec& u_in, const Vec& x, const Vec& n, double accommodation, double T,
                                   int d, RngStream& rng) {
  require(accommodation >= 0.0 && accommodation <= 1.0, "accommodation must lie in [0,1]");
  require(T > 0.0, "wall temperature must be > 0");
  (void)x;
  const double un = dot(u_in, n, d);
  if (un == 0.0) return sample_diffuse(n, d, T, rng);
  require(un > 0.0, "incoming velocity must be outgoing at the wall (u.n > 0)");
  if (accommodation < 1.0 && (accommodation == 0.0 || rng.uniform() >= accommodation)) return specular(u_in, n, d);
  return sample_diffuse(n, d, T, rng);
}

inline Vec sample_maxwell_boundary(const Vec& u_in, const Vec& x, const Vec& n, const MaxwellWall& w, double T,
                                   int d, RngStream& rng) {
  return sample_maxwell_boundary(u_in, x, n, w.accommodation(x), T, d, rng);
}

inline Vec sample_cl_kernel(const Vec& u_in, const Vec& x, const Vec& n, double r_perp, double r_par, double T,
                            int d, RngStream& rng) {
  validate(CercignaniLampisWall{r_perp, r_par});
  require(T > 0.0, "wall temperature must be > 0");
  (void)x;
  const double un = dot(u_in, n, d);
  if (un == 0.0) return sample_diffuse(n, d, T, rng);
  require(un > 0.0, "incoming velocity must be outgoing at the wall (u.n > 0)");
  const Vec u_par = axpy(-un, n, u_in);
  Vec v = detail::tangential_gaussian(n, d, T * r_par * (2.0 - r_par), rng);
  v = axpy(1.0 - r_par, u_par, v);
  const double sd = std::sqrt(T * r_perp);
  const double w1 = std::sqrt(1.0 - r_perp) * un + sd * rng.normal();
  const double w2 = sd * rng.normal();
  const double s = std::hypot(w1, w2);
  return axpy(-s, n, v);
}

// log I0(y) without overflow.
inline double log_bessel_i0(double y) {
  y = std::abs(y);
  if (y < 600.0) return std::log(std::cyl_bessel_i(0.0, y));
  return y - 0.5 * std::log(2.0 * std::numbers::pi * y) + std::log1p(1.0 / (8.0 * y));
}

// Reflection kernel R(u -> v; x) for u.n > 0, v.n < 0.
inline double cl_kernel_density(const Vec& u, const Vec& v, const Vec& n, double r_perp, double r_par, double T,
                                int d) {
  const double un = dot(u, n, d), vn = dot(v, n, d);
  const Vec u_par = axpy(-un, n, u), v_par = axpy(-vn, n, v);
  const double a = T * r_perp;
  const double b = T * r_par * (2.0 - r_par);
  Vec diff{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) diff[i] = v_par[i] - (1.0 - r_par) * u_par[i];
  const double log_r = -std::log(a) - 0.5 * (d - 1) * std::log(2.0 * std::numbers::pi * b) - vn * vn / (2.0 * a) -
                       (1.0 - r_perp) * un * un / (2.0 * a) - norm2(diff, d) / (2.0 * b) +
                       log_bessel_i0(std::sqrt(1.0 - r_perp) * un * vn / a);
  return std::exp(log_r);
}

}  // namespace hk
