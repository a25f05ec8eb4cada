#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "models.hpp"
#include "phase.hpp"
#include "quadrature.hpp"
#include "weights.hpp"

namespace hk {

// Cubature rule for averages over a velocity set: sum_k w_k f(nodes_k) approximates E f.
struct VelocityRule {
  std::vector<Vec> nodes;
  std::vector<double> weights;
};

namespace detail {

inline VelocityRule tensor_rule(const quad::Rule& r, int d) {
  VelocityRule out;
  const int n = static_cast<int>(r.nodes.size());
  int total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  out.nodes.reserve(total);
  out.weights.reserve(total);
  for (int k = 0; k < total; ++k) {
    Vec v{0.0, 0.0, 0.0};
    double w = 1.0;
    int rem = k;
    for (int i = 0; i < d; ++i) {
      v[i] = r.nodes[rem % n];
      w *= r.weights[rem % n];
      rem /= n;
    }
    out.nodes.push_back(v);
    out.weights.push_back(w);
  }
  return out;
}

inline VelocityRule make_gaussian_rule(int d, int n) { return tensor_rule(quad::gauss_hermite(n), d); }

// Unit ball in a frame whose first axis is the split direction; halves integrated separately.
inline VelocityRule make_unit_ball_rule(int d) {
  VelocityRule out;
  auto push = [&](const Vec& v, double w) {
    out.nodes.push_back(v);
    out.weights.push_back(w);
  };
  if (d == 1) {
    for (const auto& r : {quad::gauss_legendre(32, -1.0, 0.0), quad::gauss_legendre(32, 0.0, 1.0)})
      for (std::size_t i = 0; i < r.nodes.size(); ++i) push({r.nodes[i], 0.0, 0.0}, 0.5 * r.weights[i]);
    return out;
  }
  if (d == 2) {
    const auto rr = quad::gauss_legendre(24, 0.0, 1.0);
    const double h = 0.5 * std::numbers::pi;
    for (const auto& th : {quad::gauss_legendre(32, -h, h), quad::gauss_legendre(32, h, 3.0 * h)})
      for (std::size_t i = 0; i < rr.nodes.size(); ++i)
        for (std::size_t j = 0; j < th.nodes.size(); ++j) {
          const double r = rr.nodes[i];
          push({r * std::cos(th.nodes[j]), r * std::sin(th.nodes[j]), 0.0},
               rr.weights[i] * r * th.weights[j] / std::numbers::pi);
        }
    return out;
  }
  const auto rr = quad::gauss_legendre(16, 0.0, 1.0);
  const int na = 16;
  const double vol = 4.0 * std::numbers::pi / 3.0;
  for (const auto& ct : {quad::gauss_legendre(16, -1.0, 0.0), quad::gauss_legendre(16, 0.0, 1.0)})
    for (std::size_t i = 0; i < rr.nodes.size(); ++i)
      for (std::size_t j = 0; j < ct.nodes.size(); ++j)
        for (int k = 0; k < na; ++k) {
          const double r = rr.nodes[i], c = ct.nodes[j], s = std::sqrt(1.0 - c * c);
          const double ph = 2.0 * std::numbers::pi * (k + 0.5) / na;
          push({r * c, r * s * std::cos(ph), r * s * std::sin(ph)},
               rr.weights[i] * r * r * ct.weights[j] * (2.0 * std::numbers::pi / na) / vol);
        }
  return out;
}

inline VelocityRule make_sphere_rule(int d) {
  VelocityRule out;
  if (d == 1) {
    out.nodes = {{-1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    out.weights = {0.5, 0.5};
    return out;
  }
  if (d == 2) {
    const int n = 64;
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * (k + 0.5) / n;
      out.nodes.push_back({std::cos(th), std::sin(th), 0.0});
      out.weights.push_back(1.0 / n);
    }
    return out;
  }
  const auto ct = quad::gauss_legendre(8);
  const int na = 16;
  for (std::size_t j = 0; j < ct.nodes.size(); ++j)
    for (int k = 0; k < na; ++k) {
      const double c = ct.nodes[j], s = std::sqrt(1.0 - c * c);
      const double ph = 2.0 * std::numbers::pi * (k + 0.5) / na;
      out.nodes.push_back({c, s * std::cos(ph), s * std::sin(ph)});
      out.weights.push_back(ct.weights[j] / (2.0 * na));
    }
  return out;
}

inline const VelocityRule& gaussian_rule(int d) {
  static const VelocityRule r1 = make_gaussian_rule(1, 24);
  static const VelocityRule r2 = make_gaussian_rule(2, 16);
  static const VelocityRule r3 = make_gaussian_rule(3, 10);
  return d == 1 ? r1 : (d == 2 ? r2 : r3);
}

inline const VelocityRule& gaussian_rule_coarse(int d) {
  static const VelocityRule r1 = make_gaussian_rule(1, 24);
  static const VelocityRule r2 = make_gaussian_rule(2, 12);
  static const VelocityRule r3 = make_gaussian_rule(3, 8);
  return d == 1 ? r1 : (d == 2 ? r2 : r3);
}

inline const VelocityRule& unit_ball_rule(int d) {
  static const VelocityRule r1 = make_unit_ball_rule(1);
  static const VelocityRule r2 = make_unit_ball_rule(2);
  static const VelocityRule r3 = make_unit_ball_rule(3);
  return d == 1 ? r1 : (d == 2 ? r2 : r3);
}

inline const VelocityRule& sphere_rule(int d) {
  static const VelocityRule r1 = make_sphere_rule(1);
  static const VelocityRule r2 = make_sphere_rule(2);
  static const VelocityRule r3 = make_sphere_rule(3);
  return d == 1 ? r1 : (d == 2 ? r2 : r3);
}

inline const VelocityRule& unit_box_rule(int d) {
  auto make = [](int dd, int n) {
    quad::Rule r = quad::gauss_legendre(n, -1.0, 1.0);
    for (auto& w : r.weights) w *= 0.5;
    return tensor_rule(r, dd);
  };
  static const VelocityRule r1 = make(1, 48);
  static const VelocityRule r2 = make(2, 32);
  static const VelocityRule r3 = make(3, 16);
  return d == 1 ? r1 : (d == 2 ? r2 : r3);
}

// Orthonormal frame with first vector along a (e1 when a = 0).
inline std::array<Vec, 3> frame_along(const Vec& a, int d) {
  std::array<Vec, 3> e{Vec{1.0, 0.0, 0.0}, Vec{0.0, 1.0, 0.0}, Vec{0.0, 0.0, 1.0}};
  const double n = norm(a, d);
  if (n == 0.0 || d == 1) return e;
  const Vec u = scaled(1.0 / n, a);
  if (d == 2) return {u, Vec{-u[1], u[0], 0.0}, Vec{0.0, 0.0, 1.0}};
  const Vec t = std::abs(u[0]) < 0.9 ? Vec{1.0, 0.0, 0.0} : Vec{0.0, 1.0, 0.0};
  Vec b = axpy(-dot(t, u, 3), u, t);
  b = scaled(1.0 / norm(b, 3), b);
  const Vec c{u[1] * b[2] - u[2] * b[1], u[2] * b[0] - u[0] * b[2], u[0] * b[1] - u[1] * b[0]};
  return {u, b, c};
}

template <class F>
double velocity_average(const VelocityRule& r, F&& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < r.nodes.size(); ++k) s += r.weights[k] * f(r.nodes[k]);
  return s;
}

inline double fd_step(const PhaseState& z) {
  double s = 0.0;
  for (int i = 0; i < z.dim; ++i) s += z.x[i] * z.x[i] + z.v[i] * z.v[i];
  return 1e-4 * (1.0 + std::sqrt(s));
}

inline Vec grad_x_of(const WeightFn& phi, const PhaseState& z) {
  if (phi.grad_x) return phi.grad_x(z);
  const double h = fd_step(z);
  Vec g{0.0, 0.0, 0.0};
  for (int i = 0; i < z.dim; ++i) {
    PhaseState p = z, m = z;
    p.x[i] += h;
    m.x[i] -= h;
    g[i] = (phi(p) - phi(m)) / (2.0 * h);
  }
  return g;
}

inline Vec grad_v_of(const WeightFn& phi, const PhaseState& z) {
  if (phi.grad_v) return phi.grad_v(z);
  const double h = fd_step(z);
  Vec g{0.0, 0.0, 0.0};
  for (int i = 0; i < z.dim; ++i) {
    PhaseState p = z, m = z;
    p.v[i] += h;
    m.v[i] -= h;
    g[i] = (phi(p) - phi(m)) / (2.0 * h);
  }
  return g;
}

inline double lap_v_of(const WeightFn& phi, const PhaseState& z) {
  if (phi.lap_v) return phi.lap_v(z);
  const double h = fd_step(z);
  const double f0 = phi(z);
  double s = 0.0;
  for (int i = 0; i < z.dim; ++i) {
    PhaseState p = z, m = z;
    p.v[i] += h;
    m.v[i] -= h;
    s += (phi(p) - 2.0 * f0 + phi(m)) / (h * h);
  }
  return s;
}

inline double transport(const WeightFn& phi, const PhaseState& z, const Potential& pot) {
  double s = dot(z.v, grad_x_of(phi, z), z.dim);
  if (pot.family != Potential::Family::none) s -= dot(pot.grad(z.x, z.dim), grad_v_of(phi, z), z.dim);
  return s;
}

// v . grad_x phi inside a bounded domain; one-sided near the wall.
inline double transport_in_domain(const WeightFn& phi, const PhaseState& z, const Geometry& g) {
  if (phi.grad_x) return dot(z.v, phi.grad_x(z), z.dim);
  const double sp = norm(z.v, z.dim);
  if (sp == 0.0) return 0.0;
  const double h = fd_step(z) / sp;
  PhaseState p = z, m = z;
  for (int i = 0; i < z.dim; ++i) {
    p.x[i] += h * z.v[i];
    m.x[i] -= h * z.v[i];
  }
  const bool pin = g.contains(p.x), min = g.contains(m.x);
  if (pin && min) return (phi(p) - phi(m)) / (2.0 * h);
  if (pin) return (phi(p) - phi(z)) / h;
  if (min) return (phi(z) - phi(m)) / h;
  return 0.0;
}

inline double jump_gaussian(const WeightFn& phi, const PhaseState& z, const VelocityRule& r) {
  return velocity_average(r, [&](const Vec& w) {
    PhaseState q = z;
    q.v = w;
    return phi(q);
  });
}

inline double boltzmann_jump(const LinearBoltzmann& m, const WeightFn& phi, const PhaseState& z, double f0) {
  const int d = z.dim;
  const VelocityRule& G = gaussian_rule_coarse(d);
  const VelocityRule& S = sphere_rule(d);
  double acc = 0.0;
  for (std::size_t a = 0; a < G.nodes.size(); ++a) {
    const Vec& vs = G.nodes[a];
    Vec rel{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) rel[i] = z.v[i] - vs[i];
    const double rn = norm(rel, d);
    const double kern = m.gamma_hard == 0.0 ? 1.0 : std::pow(rn, m.gamma_hard);
    if (kern == 0.0) continue;
    double inner = 0.0;
    for (std::size_t b = 0; b < S.nodes.size(); ++b) {
      PhaseState q = z;
      for (int i = 0; i < d; ++i) q.v[i] = 0.5 * (z.v[i] + vs[i]) + 0.5 * rn * S.nodes[b][i];
      inner += S.weights[b] * (phi(q) - f0);
    }
    acc += G.weights[a] * kern * inner;
  }
  return m.b_const * acc;
}

inline double ball_average(const WeightFn& phi, const PhaseState& z, double R0, const Vec& axis) {
  const int d = z.dim;
  const auto e = frame_along(axis, d);
  return velocity_average(unit_ball_rule(d), [&](const Vec& u) {
    PhaseState q = z;
    for (int i = 0; i < d; ++i) {
      double c = 0.0;
      for (int k = 0; k < d; ++k) c += u[k] * e[k][i];
      q.v[i] = R0 * c;
    }
    return phi(q);
  });
}

}  // namespace detail

// Formal adjoint action L* phi at z.
inline double generator_apply(const ModelSpec& model, const WeightFn& phi, const PhaseState& z) {
  const double f0 = phi(z);
  if (!std::isfinite(f0)) throw error("weight is not finite at the evaluation point");
  if (phi.constant) return 0.0;
  struct V {
    const WeightFn& phi;
    const PhaseState& z;
    double f0;

    double operator()(const LinearBGK& m) const {
      return detail::transport(phi, z, m.potential) + detail::jump_gaussian(phi, z, detail::gaussian_rule(z.dim)) - f0;
    }
    double operator()(const KineticFokkerPlanck& m) const {
      const int d = z.dim;
      const double jv = japanese(z.v, d);
      const double fr = std::pow(jv, m.beta_friction - 2.0);
      return detail::transport(phi, z, m.potential) + detail::lap_v_of(phi, z) -
             fr * dot(z.v, detail::grad_v_of(phi, z), d);
    }
    double operator()(const LinearBoltzmann& m) const {
      return detail::transport(phi, z, m.potential) + detail::boltzmann_jump(m, phi, z, f0);
    }
    double operator()(const KnudsenGas& m) const { return detail::transport_in_domain(phi, z, m.geometry); }
    double operator()(const DegenerateBoltzmann& m) const {
      const int d = z.dim;
      double mean;
      if (m.scatter == DegenerateBoltzmann::Scatter::maxwellian) {
        mean = detail::jump_gaussian(phi, z, detail::gaussian_rule(d));
      } else {
        mean = detail::velocity_average(detail::unit_box_rule(d), [&](const Vec& u) {
          PhaseState q = z;
          q.v = scaled(m.v_max, u);
          return phi(q);
        });
      }
      return detail::transport(phi, z, m.potential) + m.sigma(z.x) * (mean - f0);
    }
    double operator()(const RunTumble& m) const {
      const Vec gm = rt_gradM(m, z.x);
      const double rate = rt_rate(m, z.x, z.v);
      return dot(z.v, detail::grad_x_of(phi, z), z.dim) + rate * (detail::ball_average(phi, z, m.R0, gm) - f0);
    }
    double operator()(const FitzHughNagumo& m) const {
      const double x = z.x[0], v = z.v[0];
      const double A = m.a * x - m.b * v;
      const double B = x + v * (v - 1.0) * (v - m.c);
      return -A * detail::grad_x_of(phi, z)[0] - B * detail::grad_v_of(phi, z)[0] + detail::lap_v_of(phi, z);
    }
  };
  const double g = std::visit(V{phi, z, f0}, model);
  if (!std::isfinite(g)) throw error("generator value is not finite");
  return g;
}

}  // namespace hk
