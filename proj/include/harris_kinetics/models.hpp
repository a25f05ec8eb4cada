#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "boundary.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "phase.hpp"
#include "potential.hpp"
#include "rng.hpp"

namespace hk {

struct LinearBGK {
  int d = 1;
  bool torus = true;
  Potential potential;
};

struct KineticFokkerPlanck {
  int d = 1;
  Potential potential = Potential::power(2.0);
  double beta_friction = 2.0;
  double dt = 0.05;
};

struct LinearBoltzmann {
  int d = 1;
  double gamma_hard = 0.0;
  double b_const = 1.0;
  bool torus = true;
  Potential potential;
};

struct KnudsenGas {
  Geometry geometry = Geometry::disk(1.0);
  BoundarySpec boundary = DiffuseWall{};
  std::function<double(const Vec&)> wall_temp = [](const Vec&) { return 1.0; };
  std::optional<double> uniform_temperature = 1.0;  // set when wall_temp is constant

  static KnudsenGas with_constant_temperature(Geometry g, BoundarySpec b, double T) {
    require(T > 0.0, "wall temperature must be > 0");
    KnudsenGas k;
    k.geometry = g;
    k.boundary = std::move(b);
    k.wall_temp = [T](const Vec&) { return T; };
    k.uniform_temperature = T;
    return k;
  }
};

struct DegenerateBoltzmann {
  enum class Scatter { uniform, maxwellian };

  int d = 1;
  std::function<double(const Vec&)> sigma = [](const Vec&) { return 1.0; };
  double sigma_inf = 1.0;
  Scatter scatter = Scatter::uniform;
  double v_max = 1.0;  // uniform scattering on [-v_max, v_max]^d
  Potential potential;
};

struct RunTumble {
  enum class Psi { sign, tanh };

  int d = 2;
  double chi = 0.5;
  Psi psi = Psi::tanh;
  double alpha = 1.0;  // M(x) = -alpha <x>
  double R0 = 1.0 / std::sqrt(std::numbers::pi);
};

struct FitzHughNagumo {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double dt = 0.01;
};

using ModelSpec =
    std::variant<LinearBGK, KineticFokkerPlanck, LinearBoltzmann, KnudsenGas, DegenerateBoltzmann, RunTumble,
                 FitzHughNagumo>;

inline int model_dim(const ModelSpec& m) {
  struct V {
    int operator()(const LinearBGK& s) const { return s.d; }
    int operator()(const KineticFokkerPlanck& s) const { return s.d; }
    int operator()(const LinearBoltzmann& s) const { return s.d; }
    int operator()(const KnudsenGas& s) const { return s.geometry.dim; }
    int operator()(const DegenerateBoltzmann& s) const { return s.d; }
    int operator()(const RunTumble& s) const { return s.d; }
    int operator()(const FitzHughNagumo&) const { return 1; }
  };
  return std::visit(V{}, m);
}

inline std::string model_name(const ModelSpec& m) {
  struct V {
    std::string operator()(const LinearBGK&) const { return "linear_bgk"; }
    std::string operator()(const KineticFokkerPlanck&) const { return "kinetic_fokker_planck"; }
    std::string operator()(const LinearBoltzmann&) const { return "linear_boltzmann"; }
    std::string operator()(const KnudsenGas&) const { return "knudsen_gas"; }
    std::string operator()(const DegenerateBoltzmann&) const { return "degenerate_boltzmann"; }
    std::string operator()(const RunTumble&) const { return "run_tumble"; }
    std::string operator()(const FitzHughNagumo&) const { return "fitzhugh_nagumo"; }
  };
  return std::visit(V{}, m);
}

// Positions live on the unit torus [0,1)^d.
inline bool toroidal(const ModelSpec& m) {
  if (auto p = std::get_if<LinearBGK>(&m)) return p->torus;
  if (auto p = std::get_if<LinearBoltzmann>(&m)) return p->torus;
  return std::holds_alternative<DegenerateBoltzmann>(m);
}

inline void validate(const ModelSpec& m) {
  struct V {
    void operator()(const LinearBGK& s) const {
      require(s.d >= 1 && s.d <= 3, "d must be 1, 2 or 3");
      if (s.torus) require(s.potential.periodic(), "torus model needs a periodic potential");
    }
    void operator()(const KineticFokkerPlanck& s) const {
      require(s.d >= 1 && s.d <= 3, "d must be 1, 2 or 3");
      require(s.beta_friction >= 2.0, "beta_friction must be >= 2");
      require(s.dt > 0.0, "dt must be > 0");
      require(s.potential.family == Potential::Family::power || s.potential.family == Potential::Family::quadratic,
              "kinetic Fokker-Planck needs a power or quadratic potential");
    }
    void operator()(const LinearBoltzmann& s) const {
      require(s.d >= 1 && s.d <= 3, "d must be 1, 2 or 3");
      require(s.gamma_hard >= 0.0 && s.gamma_hard <= 1.0, "gamma_hard must lie in [0,1]");
      require(s.b_const > 0.0, "b_const must be > 0");
      if (s.torus) require(s.potential.periodic(), "torus model needs a periodic potential");
    }
    void operator()(const KnudsenGas& s) const {
      if (auto cl = std::get_if<CercignaniLampisWall>(&s.boundary)) hk::validate(*cl);
    }
    void operator()(const DegenerateBoltzmann& s) const {
      require(s.d >= 1 && s.d <= 3, "d must be 1, 2 or 3");
      require(s.sigma_inf >= 0.0, "sigma_inf must be >= 0");
      require(s.v_max > 0.0, "v_max must be > 0");
      require(s.potential.periodic(), "degenerate Boltzmann lives on the torus; potential must be periodic");
      if (s.potential.family != Potential::Family::none)
        require(s.scatter == DegenerateBoltzmann::Scatter::maxwellian,
                "a potential requires the unbounded velocity set (maxwellian scattering)");
    }
    void operator()(const RunTumble& s) const {
      require(s.d >= 1 && s.d <= 3, "d must be 1, 2 or 3");
      require(s.chi > 0.0 && s.chi < 1.0, "chi must lie in (0,1)");
      require(s.alpha > 0.0, "alpha must be > 0");
      require(s.R0 > 0.0, "R0 must be > 0");
    }
    void operator()(const FitzHughNagumo& s) const {
      require(s.a > 0.0 && s.b > 0.0 && s.c > 0.0, "a, b, c must be > 0");
      require(s.dt > 0.0, "dt must be > 0");
    }
  };
  std::visit(V{}, m);
}

// ---------------------------------------------------------------------------
// Elementary samplers

inline Vec sample_gaussian(int d, RngStream& rng, double sd = 1.0) {
  Vec v{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) v[i] = sd * rng.normal();
  return v;
}

inline Vec sample_sphere(int d, RngStream& rng) {
  if (d == 1) return {rng.uniform() < 0.5 ? -1.0 : 1.0, 0.0, 0.0};
  while (true) {
    Vec g = sample_gaussian(d, rng);
    const double r = norm(g, d);
    if (r > 1e-300) return scaled(1.0 / r, g);
  }
}

inline Vec sample_ball(int d, double R, RngStream& rng) {
  const Vec u = sample_sphere(d, rng);
  return scaled(R * std::pow(rng.uniform(), 1.0 / d), u);
}

inline double wrap01(double x) {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

inline void wrap_torus(PhaseState& s) {
  for (int i = 0; i < s.dim; ++i) s.x[i] = wrap01(s.x[i]);
}

// E|Z|^gamma for Z standard normal in R^d.
inline double abs_moment(double gamma, int d) {
  return std::pow(2.0, 0.5 * gamma) * std::tgamma(0.5 * (d + gamma)) / std::tgamma(0.5 * d);
}

// Lambda_gamma(v) = E|v - Z|^gamma, closed form via Kummer's function.
inline double collision_frequency(const Vec& v, double gamma_hard, int d) {
  require(gamma_hard >= 0.0 && gamma_hard <= 1.0, "gamma_hard must lie in [0,1]");
  if (gamma_hard == 0.0) return 1.0;
  const double z = -0.5 * norm2(v, d);
  return abs_moment(gamma_hard, d) * boost::math::hypergeometric_1F1(-0.5 * gamma_hard, 0.5 * d, z);
}

// Jensen bound (|v|^2 + d)^{gamma/2}; equals (1+|v|^2)^{gamma/2} for d = 1.
inline double collision_frequency_bound(const Vec& v, double gamma_hard, int d) {
  return std::pow(norm2(v, d) + d, 0.5 * gamma_hard);
}

// ---------------------------------------------------------------------------
// Deterministic transport

inline constexpr double kFlowStep = 1e-2;

// Characteristics x' = v, v' = -grad Phi for time t.
inline void flow(PhaseState& s, const Potential& pot, double t, bool torus) {
  const int d = s.dim;
  if (t <= 0.0) return;
  switch (pot.family) {
    case Potential::Family::none:
      for (int i = 0; i < d; ++i) s.x[i] += s.v[i] * t;
      break;
    case Potential::Family::quadratic: {
      const double w = std::sqrt(pot.k);
      const double c = std::cos(w * t), sn = std::sin(w * t);
      for (int i = 0; i < d; ++i) {
        const double x = s.x[i], v = s.v[i];
        s.x[i] = x * c + v / w * sn;
        s.v[i] = -x * w * sn + v * c;
      }
      break;
    }
    default: {
      double h_max = kFlowStep;
      const double L = pot.hessian_bound();
      if (std::isfinite(L) && L > 0.0) h_max = std::min(h_max, 0.1 / std::sqrt(L));
      const int n = std::max(1, static_cast<int>(std::ceil(t / h_max)));
      const double h = t / n;
      Vec g = pot.grad(s.x, d);
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < d; ++i) s.v[i] -= 0.5 * h * g[i];
        for (int i = 0; i < d; ++i) s.x[i] += h * s.v[i];
        g = pot.grad(s.x, d);
        for (int i = 0; i < d; ++i) s.v[i] -= 0.5 * h * g[i];
      }
    }
  }
  if (torus) wrap_torus(s);
}

// ---------------------------------------------------------------------------
// Per-model increments

namespace detail {

inline void step_bgk(const LinearBGK& m, PhaseState& s, double dt, RngStream& rng) {
  double rem = dt;
  while (true) {
    const double tau = rng.exponential();
    if (tau >= rem) {
      flow(s, m.potential, rem, m.torus);
      break;
    }
    flow(s, m.potential, tau, m.torus);
    rem -= tau;
    s.v = sample_gaussian(s.dim, rng);
  }
}

inline double speed_bound(const PhaseState& s, const Potential& pot) {
  if (pot.family == Potential::Family::none) return norm(s.v, s.dim);
  const double H = pot.value(s.x, s.dim) - pot.min_value() + 0.5 * norm2(s.v, s.dim);
  return std::sqrt(2.0 * H) * 1.01 + 1e-12;
}

inline void step_boltzmann(const LinearBoltzmann& m, PhaseState& s, double dt, RngStream& rng) {
  const int d = s.dim;
  const double g = m.gamma_hard;
  const double ez = abs_moment(g, d);
  std::gamma_distribution<double> size_biased(0.5 * (d + g), 1.0);
  double rem = dt;
  while (true) {
    const double vb = g == 0.0 ? 1.0 : std::pow(speed_bound(s, m.potential), g);
    const double rate = g == 0.0 ? 1.0 : vb + ez;
    const double tau = rng.exponential(m.b_const * rate);
    if (tau >= rem) {
      flow(s, m.potential, rem, m.torus);
      break;
    }
    flow(s, m.potential, tau, m.torus);
    rem -= tau;
    Vec vs;
    if (g == 0.0 || rng.uniform() * rate < vb) {
      vs = sample_gaussian(d, rng);
    } else {
      const double r = std::sqrt(2.0 * size_biased(rng));
      vs = scaled(r, sample_sphere(d, rng));
    }
    Vec rel{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) rel[i] = s.v[i] - vs[i];
    const double rn = norm(rel, d);
    if (g > 0.0) {
      const double accept = std::pow(rn, g) / (vb + std::pow(norm(vs, d), g));
      if (rng.uniform() >= accept) continue;
    }
    const Vec sig = sample_sphere(d, rng);
    for (int i = 0; i < d; ++i) s.v[i] = 0.5 * (s.v[i] + vs[i]) + 0.5 * rn * sig[i];
  }
}

inline double kfp_dt_limit(const KineticFokkerPlanck& m) {
  const double L = m.potential.hessian_bound();
  if (!std::isfinite(L)) return 1e-2;
  return L > 0.0 ? std::min(1.0, 1.0 / std::sqrt(L)) : 1.0;
}

inline void step_kfp(const KineticFokkerPlanck& m, PhaseState& s, double h, RngStream& rng) {
  const double limit = kfp_dt_limit(m);
  if (h > limit) {
    std::ostringstream os;
    os << "dt = " << h << " exceeds the integrator stability limit " << limit;
    throw stability_error(os.str(), limit);
  }
  const int d = s.dim;
  auto kick = [&](double w) {
    const Vec g = m.potential.grad(s.x, d);
    for (int i = 0; i < d; ++i) s.v[i] -= w * g[i];
  };
  auto drift = [&](double w) {
    for (int i = 0; i < d; ++i) s.x[i] += w * s.v[i];
  };
  kick(0.5 * h);
  drift(0.5 * h);
  if (m.beta_friction == 2.0) {
    const double c = std::exp(-h), sd = std::sqrt(-std::expm1(-2.0 * h));
    for (int i = 0; i < d; ++i) s.v[i] = c * s.v[i] + sd * rng.normal();
  } else {
    // Implicit friction: solve r (1 + h <r>^{beta-2}) = |w| along the direction of w.
    Vec w = s.v;
    for (int i = 0; i < d; ++i) w[i] += std::sqrt(2.0 * h) * rng.normal();
    const double wn = norm(w, d);
    if (wn > 0.0) {
      const double e = m.beta_friction - 2.0;
      auto F = [&](double r) { return r * (1.0 + h * std::pow(1.0 + r * r, 0.5 * e)) - wn; };
      double lo = 0.0, hi = wn;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) > 0.0 ? hi : lo) = mid;
      }
      const double r = 0.5 * (lo + hi);
      s.v = scaled(r / wn, w);
    }
  }
  drift(0.5 * h);
  kick(0.5 * h);
}

inline constexpr double kFhnDtLimit = 1e-2;

inline void step_fhn(const FitzHughNagumo& m, PhaseState& s, double h, RngStream& rng) {
  if (h > kFhnDtLimit) {
    std::ostringstream os;
    os << "dt = " << h << " exceeds the integrator stability limit " << kFhnDtLimit;
    throw stability_error(os.str(), kFhnDtLimit);
  }
  const double x = s.x[0], v = s.v[0];
  const double A = m.a * x - m.b * v;
  const double B = x + v * (v - 1.0) * (v - m.c);
  const double bx = -A, bv = -B;
  const double tame = 1.0 + h * std::hypot(bx, bv);
  s.x[0] = x + h * bx / tame;
  s.v[0] = v + h * bv / tame + std::sqrt(2.0 * h) * rng.normal();
}

inline void step_knudsen(const KnudsenGas& m, PhaseState& s, double dt, RngStream& rng) {
  if (!s.alive) return;
  const Geometry& g = m.geometry;
  const int d = g.dim;
  double rem = dt;
  for (long events = 0;; ++events) {
    if (events > 10'000'000) throw error("Knudsen step: event budget exhausted");
    const double tau = first_collision_time(s.x, s.v, g);
    if (tau > rem) {
      for (int i = 0; i < d; ++i) s.x[i] += s.v[i] * rem;
      if (!g.contains(s.x)) s.x = g.project_to_boundary(s.x, g.normal(s.x));
      return;
    }
    for (int i = 0; i < d; ++i) s.x[i] += s.v[i] * tau;
    rem -= tau;
    Vec n = g.normal(s.x);
    s.x = g.project_to_boundary(s.x, n);
    n = g.normal(s.x);
    const double T = m.wall_temp(s.x);
    struct Bounce {
      const Vec& u;
      const Vec& x;
      const Vec& n;
      double T;
      int d;
      RngStream& rng;
      bool& alive;
      Vec operator()(const MaxwellWall& w) const { return sample_maxwell_boundary(u, x, n, w, T, d, rng); }
      Vec operator()(const CercignaniLampisWall& w) const {
        return sample_cl_kernel(u, x, n, w.r_perp, w.r_par, T, d, rng);
      }
      Vec operator()(const AbsorbingWall&) const {
        alive = false;
        return u;
      }
      Vec operator()(const DiffuseWall&) const { return sample_diffuse(n, d, T, rng); }
    };
    s.v = std::visit(Bounce{s.v, s.x, n, T, d, rng, s.alive}, m.boundary);
    if (!s.alive) return;
  }
}

inline Vec degenerate_scatter(const DegenerateBoltzmann& m, int d, RngStream& rng) {
  if (m.scatter == DegenerateBoltzmann::Scatter::maxwellian) return sample_gaussian(d, rng);
  Vec v{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) v[i] = m.v_max * (2.0 * rng.uniform() - 1.0);
  return v;
}

inline void step_degenerate(const DegenerateBoltzmann& m, PhaseState& s, double dt, RngStream& rng) {
  if (m.sigma_inf == 0.0) {
    flow(s, m.potential, dt, true);
    return;
  }
  double rem = dt;
  while (true) {
    const double tau = rng.exponential(m.sigma_inf);
    if (tau >= rem) {
      flow(s, m.potential, rem, true);
      break;
    }
    flow(s, m.potential, tau, true);
    rem -= tau;
    const double sg = m.sigma(s.x);
    if (sg > m.sigma_inf * (1.0 + 1e-12)) throw invalid_input("sigma exceeds the declared sigma_inf");
    if (rng.uniform() * m.sigma_inf < sg) s.v = degenerate_scatter(m, s.dim, rng);
  }
}

}  // namespace detail

// Run-and-tumble helpers: M(x) = -alpha <x>, m = v . grad M.
inline double rt_M(const RunTumble& m, const Vec& x) { return -m.alpha * japanese(x, m.d); }

inline Vec rt_gradM(const RunTumble& m, const Vec& x) { return scaled(-m.alpha / japanese(x, m.d), x); }

inline double rt_psi(const RunTumble& m, double z) {
  if (m.psi == RunTumble::Psi::tanh) return std::tanh(z);
  return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
}

inline double rt_rate(const RunTumble& m, const Vec& x, const Vec& v) {
  const double mm = dot(v, rt_gradM(m, x), m.d);
  return 1.0 - m.chi * rt_psi(m, mm);
}

namespace detail {

inline void step_run_tumble(const RunTumble& m, PhaseState& s, double dt, RngStream& rng) {
  const double bound = 1.0 + m.chi;
  double rem = dt;
  while (true) {
    const double tau = rng.exponential(bound);
    if (tau >= rem) {
      for (int i = 0; i < s.dim; ++i) s.x[i] += s.v[i] * rem;
      break;
    }
    for (int i = 0; i < s.dim; ++i) s.x[i] += s.v[i] * tau;
    rem -= tau;
    if (rng.uniform() * bound < rt_rate(m, s.x, s.v)) s.v = sample_ball(s.dim, m.R0, rng);
  }
}

}  // namespace detail

// Largest admissible dt for one call of step (infinite for exactly simulated models).
inline double step_limit(const ModelSpec& m) {
  if (auto p = std::get_if<KineticFokkerPlanck>(&m)) return detail::kfp_dt_limit(*p);
  if (std::holds_alternative<FitzHughNagumo>(m)) return detail::kFhnDtLimit;
  return std::numeric_limits<double>::infinity();
}

// Internal step size used when advancing a trajectory over a longer interval.
inline double preferred_dt(const ModelSpec& m) {
  if (auto p = std::get_if<KineticFokkerPlanck>(&m)) return std::min(p->dt, detail::kfp_dt_limit(*p));
  if (auto p = std::get_if<FitzHughNagumo>(&m)) return std::min(p->dt, detail::kFhnDtLimit);
  return std::numeric_limits<double>::infinity();
}

inline PhaseState step(const ModelSpec& model, const PhaseState& in, double dt, RngStream& rng) {
  require(dt > 0.0, "dt must be > 0");
  PhaseState s = in;
  struct V {
    PhaseState& s;
    double dt;
    RngStream& rng;
    void operator()(const LinearBGK& m) const { detail::step_bgk(m, s, dt, rng); }
    void operator()(const KineticFokkerPlanck& m) const { detail::step_kfp(m, s, dt, rng); }
    void operator()(const LinearBoltzmann& m) const { detail::step_boltzmann(m, s, dt, rng); }
    void operator()(const KnudsenGas& m) const { detail::step_knudsen(m, s, dt, rng); }
    void operator()(const DegenerateBoltzmann& m) const { detail::step_degenerate(m, s, dt, rng); }
    void operator()(const RunTumble& m) const { detail::step_run_tumble(m, s, dt, rng); }
    void operator()(const FitzHughNagumo& m) const { detail::step_fhn(m, s, dt, rng); }
  };
  std::visit(V{s, dt, rng}, model);
  s.t = in.t + dt;
  return s;
}

// Advance over [t, t + horizon] using sub-steps no larger than preferred_dt.
inline void advance(const ModelSpec& model, PhaseState& s, double horizon, RngStream& rng) {
  if (horizon <= 0.0) return;
  const double h = preferred_dt(model);
  if (!std::isfinite(h)) {
    const double t1 = s.t + horizon;
    s = step(model, s, horizon, rng);
    s.t = t1;
    return;
  }
  const int n = std::max(1, static_cast<int>(std::ceil(horizon / h * (1.0 - 1e-12))));
  const double dt = horizon / n;
  const double t1 = s.t + horizon;
  for (int k = 0; k < n; ++k) s = step(model, s, dt, rng);
  s.t = t1;
}

}  // namespace hk
