#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "models.hpp"
#include "phase.hpp"
#include "potential.hpp"

namespace hk {

// Lyapunov weight phi(z) >= 1 with optional analytic derivatives.
struct WeightFn {
  std::string tag;
  std::string provenance;
  std::vector<std::pair<std::string, double>> params;
  std::function<double(const PhaseState&)> eval;
  std::function<Vec(const PhaseState&)> grad_x;  // empty: finite differences
  std::function<Vec(const PhaseState&)> grad_v;
  std::function<double(const PhaseState&)> lap_v;
  bool constant = false;

  double operator()(const PhaseState& z) const { return eval(z); }

  double param(const std::string& name) const {
    for (const auto& [k, v] : params)
      if (k == name) return v;
    throw invalid_input("weight " + tag + " has no parameter " + name);
  }
};

using WeightParams = std::map<std::string, double>;

namespace detail {

inline double get_or(const WeightParams& p, const std::string& k, double def) {
  auto it = p.find(k);
  return it == p.end() ? def : it->second;
}

inline Vec zero_vec() { return {0.0, 0.0, 0.0}; }

// Gradient of x.v/<x> with respect to x.
inline Vec grad_x_xv_over_jx(const Vec& x, const Vec& v, int d) {
  const double jx = japanese(x, d);
  const double xv = dot(x, v, d);
  Vec g{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) g[i] = v[i] / jx - xv * x[i] / (jx * jx * jx);
  return g;
}

}  // namespace detail

// Constants of the run-and-tumble drift argument for M(x) = -alpha <x> and a uniform velocity ball.
struct RunTumbleConstants {
  double beta;
  double gamma;
  double lambda_tilde;
  int k;
  double xi;
  double C_tilde;  // lower bound of |grad M| on |x| > R
  double R;
  double grad_M_sup;
};

// E|s| and E s^2 for s the projection of the uniform ball of radius R0 in R^d onto an axis.
inline double ball_projection_abs_mean(int d, double R0) {
  const double a = 0.5 * (d - 1);
  const double mass = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / (2.0 * std::tgamma(a + 1.5));
  return R0 * (1.0 / (d + 1.0)) / mass;
}

inline double ball_projection_second_moment(int d, double R0) { return R0 * R0 / (d + 2.0); }

inline RunTumbleConstants run_tumble_constants(const RunTumble& m, double R = 1.0) {
  RunTumbleConstants c{};
  c.beta = m.chi / (1.0 + m.chi);
  c.grad_M_sup = m.alpha;
  c.R = R;
  c.C_tilde = m.alpha * R / std::sqrt(1.0 + R * R);
  const double L = m.R0 * m.alpha;
  if (m.psi == RunTumble::Psi::tanh) {
    c.k = 2;
    c.lambda_tilde = std::tanh(L) / L * ball_projection_second_moment(m.d, m.R0);
  } else {
    c.k = 1;
    c.lambda_tilde = ball_projection_abs_mean(m.d, m.R0);
  }
  if (c.k < 2)
    c.xi = std::pow(c.C_tilde, c.k - 2.0);
  else if (c.k == 2)
    c.xi = 1.0;
  else
    c.xi = std::pow(c.grad_M_sup, c.k - 2.0);
  const double g1 = c.lambda_tilde * m.chi * (1.0 - m.chi) * c.xi / (8.0 * (1.0 + m.chi));
  const double g2 = (1.0 + m.chi) / (2.0 * (2.0 + m.chi) * m.R0 * c.grad_M_sup);
  c.gamma = std::min(g1, g2);
  return c;
}

inline std::vector<std::string> catalog_tags() {
  return {"one",        "bgk_r2",   "bgk_r3",    "knudsen_maxwell", "knudsen_cl", "lboltz_r1",
          "lboltz_r2",  "lboltz_r3", "kfp_r2",   "run_tumble",      "run_tumble_exp", "fhn"};
}

namespace detail {

[[noreturn]] inline void bad_tag(const std::string& tag, const ModelSpec& m) {
  std::ostringstream os;
  os << "weight tag '" << tag << "' is not valid for model " << model_name(m) << "; valid tags:";
  for (const auto& t : catalog_tags()) os << ' ' << t;
  throw invalid_input(os.str());
}

inline WeightFn weight_one() {
  WeightFn w;
  w.tag = "one";
  w.provenance = "constant weight (plain total variation)";
  w.eval = [](const PhaseState&) { return 1.0; };
  w.grad_x = [](const PhaseState&) { return zero_vec(); };
  w.grad_v = [](const PhaseState&) { return zero_vec(); };
  w.lap_v = [](const PhaseState&) { return 0.0; };
  w.constant = true;
  return w;
}

// u = 1 + |v|^2/2 + Phi + x.v/4 + |x|^2/8
inline WeightFn weight_bgk_r2(const Potential& pot) {
  WeightFn w;
  w.tag = "bgk_r2";
  w.provenance = "linear BGK R2: 1 + H(x,v) + x.v/4 + |x|^2/8";
  w.eval = [pot](const PhaseState& z) {
    const int d = z.dim;
    return 1.0 + 0.5 * norm2(z.v, d) + pot.value(z.x, d) + 0.25 * dot(z.x, z.v, d) + 0.125 * norm2(z.x, d);
  };
  w.grad_x = [pot](const PhaseState& z) {
    const int d = z.dim;
    Vec g = pot.grad(z.x, d);
    for (int i = 0; i < d; ++i) g[i] += 0.25 * z.v[i] + 0.25 * z.x[i];
    return g;
  };
  w.grad_v = [](const PhaseState& z) {
    Vec g{0.0, 0.0, 0.0};
    for (int i = 0; i < z.dim; ++i) g[i] = z.v[i] + 0.25 * z.x[i];
    return g;
  };
  w.lap_v = [](const PhaseState& z) { return static_cast<double>(z.dim); };
  return w;
}

inline WeightFn weight_power_of(const WeightFn& base, double xi, const std::string& tag, const std::string& prov) {
  WeightFn w;
  w.tag = tag;
  w.provenance = prov;
  w.params = {{"xi", xi}};
  auto u = base.eval;
  auto gx = base.grad_x;
  auto gv = base.grad_v;
  auto lv = base.lap_v;
  w.eval = [u, xi](const PhaseState& z) { return std::pow(u(z), xi); };
  w.grad_x = [u, gx, xi](const PhaseState& z) { return scaled(xi * std::pow(u(z), xi - 1.0), gx(z)); };
  w.grad_v = [u, gv, xi](const PhaseState& z) { return scaled(xi * std::pow(u(z), xi - 1.0), gv(z)); };
  w.lap_v = [u, gv, lv, xi](const PhaseState& z) {
    const double uu = u(z);
    const Vec g = gv(z);
    return xi * std::pow(uu, xi - 1.0) * lv(z) + xi * (xi - 1.0) * std::pow(uu, xi - 2.0) * norm2(g, z.dim);
  };
  return w;
}

inline WeightFn weight_lboltz(const Potential& pot, int regime, double a, double b) {
  WeightFn w;
  w.tag = "lboltz_r" + std::to_string(regime);
  if (regime == 1) w.provenance = "linear Boltzmann R1: 1 + H(x,v)";
  if (regime == 2) w.provenance = "linear Boltzmann R2: 1 + H(x,v) + |x|^2";
  if (regime == 3) {
    w.provenance = "linear Boltzmann R3: 1 + H(x,v) + alpha x.v/<x> + beta <x>";
    w.params = {{"alpha", a}, {"beta", b}};
  }
  const double cx2 = regime == 2 ? 1.0 : 0.0;
  const double ca = regime == 3 ? a : 0.0;
  const double cb = regime == 3 ? b : 0.0;
  w.eval = [=](const PhaseState& z) {
    const int d = z.dim;
    const double jx = japanese(z.x, d);
    return 1.0 + 0.5 * norm2(z.v, d) + pot.value(z.x, d) + cx2 * norm2(z.x, d) + ca * dot(z.x, z.v, d) / jx +
           cb * jx;
  };
  w.grad_x = [=](const PhaseState& z) {
    const int d = z.dim;
    const double jx = japanese(z.x, d);
    Vec g = pot.grad(z.x, d);
    const Vec c = grad_x_xv_over_jx(z.x, z.v, d);
    for (int i = 0; i < d; ++i) g[i] += 2.0 * cx2 * z.x[i] + ca * c[i] + cb * z.x[i] / jx;
    return g;
  };
  w.grad_v = [=](const PhaseState& z) {
    const int d = z.dim;
    const double jx = japanese(z.x, d);
    Vec g{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) g[i] = z.v[i] + ca * z.x[i] / jx;
    return g;
  };
  w.lap_v = [](const PhaseState& z) { return static_cast<double>(z.dim); };
  return w;
}

// exp(chi * psi) with psi smooth; derivative callbacks for psi.
struct ExpWeightParts {
  std::function<double(const PhaseState&)> psi;
  std::function<Vec(const PhaseState&)> gx, gv;
  std::function<double(const PhaseState&)> lap;
};

inline WeightFn weight_exp(double chi, ExpWeightParts p) {
  WeightFn w;
  w.eval = [chi, p](const PhaseState& z) { return std::exp(chi * p.psi(z)); };
  w.grad_x = [chi, p](const PhaseState& z) { return scaled(chi * std::exp(chi * p.psi(z)), p.gx(z)); };
  w.grad_v = [chi, p](const PhaseState& z) { return scaled(chi * std::exp(chi * p.psi(z)), p.gv(z)); };
  w.lap_v = [chi, p](const PhaseState& z) {
    const Vec g = p.gv(z);
    return chi * std::exp(chi * p.psi(z)) * (p.lap(z) + chi * norm2(g, z.dim));
  };
  return w;
}

inline WeightFn weight_kfp(const KineticFokkerPlanck& m, double chi, double eps) {
  const Potential pot = m.potential;
  if (pot.family == Potential::Family::quadratic)
    require(eps * eps <= 2.0 * pot.k, "kfp_r2 requires eps^2 <= 2k so that phi >= 1");
  else
    require(eps * eps <= 4.0 * pot.min_value(), "kfp_r2 requires eps^2 <= 4 min Phi so that phi >= 1");
  ExpWeightParts p;
  p.psi = [pot, eps](const PhaseState& z) {
    const int d = z.dim;
    return norm2(z.v, d) + pot.value(z.x, d) + eps * dot(z.v, z.x, d) / japanese(z.x, d);
  };
  p.gx = [pot, eps](const PhaseState& z) {
    const int d = z.dim;
    Vec g = pot.grad(z.x, d);
    const Vec c = grad_x_xv_over_jx(z.x, z.v, d);
    for (int i = 0; i < d; ++i) g[i] += eps * c[i];
    return g;
  };
  p.gv = [eps](const PhaseState& z) {
    const int d = z.dim;
    const double jx = japanese(z.x, d);
    Vec g{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) g[i] = 2.0 * z.v[i] + eps * z.x[i] / jx;
    return g;
  };
  p.lap = [](const PhaseState& z) { return 2.0 * z.dim; };
  WeightFn w = weight_exp(chi, p);
  w.tag = "kfp_r2";
  w.provenance = "kinetic Fokker-Planck: exp(chi (|v|^2 + Phi(x) + eps v.x/<x>))";
  w.params = {{"chi", chi}, {"eps", eps}};
  return w;
}

inline WeightFn weight_fhn(double chi) {
  ExpWeightParts p;
  p.psi = [](const PhaseState& z) { return z.x[0] * z.x[0] + z.v[0] * z.v[0]; };
  p.gx = [](const PhaseState& z) { return Vec{2.0 * z.x[0], 0.0, 0.0}; };
  p.gv = [](const PhaseState& z) { return Vec{2.0 * z.v[0], 0.0, 0.0}; };
  p.lap = [](const PhaseState&) { return 2.0; };
  WeightFn w = weight_exp(chi, p);
  w.tag = "fhn";
  w.provenance = "FitzHugh-Nagumo: exp(chi (|x|^2 + |v|^2)), |v^2| read as |v|^2";
  w.params = {{"chi", chi}};
  return w;
}

inline double rt_psi_deriv(const RunTumble& m, double z) {
  if (m.psi == RunTumble::Psi::tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return 0.0;
}

inline WeightFn weight_run_tumble(const RunTumble& m, double gamma, double beta) {
  require(gamma > 0.0, "run_tumble weight requires gamma > 0");
  require(beta > 0.0, "run_tumble weight requires beta > 0");
  WeightFn w;
  w.tag = "run_tumble";
  w.provenance = "run and tumble: 1 + (1 - gamma m - beta gamma psi(m) m) exp(-gamma M(x)), m = v.grad M";
  w.params = {{"gamma", gamma}, {"beta", beta}};
  auto q = [m, gamma, beta](double mm) { return 1.0 - gamma * mm - beta * gamma * rt_psi(m, mm) * mm; };
  auto dq = [m, gamma, beta](double mm) {
    return -gamma - beta * gamma * (rt_psi_deriv(m, mm) * mm + rt_psi(m, mm));
  };
  w.eval = [m, q, gamma](const PhaseState& z) {
    const double mm = dot(z.v, rt_gradM(m, z.x), z.dim);
    return 1.0 + q(mm) * std::exp(-gamma * rt_M(m, z.x));
  };
  w.grad_x = [m, q, dq, gamma](const PhaseState& z) {
    const int d = z.dim;
    const double jx = japanese(z.x, d);
    const double mm = dot(z.v, rt_gradM(m, z.x), d);
    const double E = std::exp(-gamma * rt_M(m, z.x));
    const Vec hv = grad_x_xv_over_jx(z.x, z.v, d);  // grad_x m = -alpha hv
    Vec g{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) g[i] = E * (dq(mm) * (-m.alpha) * hv[i] + q(mm) * gamma * m.alpha * z.x[i] / jx);
    return g;
  };
  w.grad_v = [m, dq, gamma](const PhaseState& z) {
    const Vec gm = rt_gradM(m, z.x);
    const double mm = dot(z.v, gm, z.dim);
    return scaled(dq(mm) * std::exp(-gamma * rt_M(m, z.x)), gm);
  };
  return w;
}

inline WeightFn weight_run_tumble_exp(double omega) {
  require(omega > 0.0, "run_tumble_exp requires omega > 0 (weight exp(omega <x>))");
  WeightFn w;
  w.tag = "run_tumble_exp";
  w.provenance = "run and tumble A4: exp(omega <x>), omega taken positive so that phi >= 1";
  w.params = {{"omega", omega}};
  w.eval = [omega](const PhaseState& z) { return std::exp(omega * japanese(z.x, z.dim)); };
  w.grad_x = [omega](const PhaseState& z) {
    const double jx = japanese(z.x, z.dim);
    Vec g{0.0, 0.0, 0.0};
    for (int i = 0; i < z.dim; ++i) g[i] = omega * std::exp(omega * jx) * z.x[i] / jx;
    return g;
  };
  w.grad_v = [](const PhaseState&) { return zero_vec(); };
  w.lap_v = [](const PhaseState&) { return 0.0; };
  return w;
}

inline WeightFn weight_knudsen_maxwell(const KnudsenGas& m, double i_exp, double alpha1) {
  require(alpha1 > 0.0 && alpha1 <= 1.0, "alpha1 must lie in (0,1]");
  const Geometry g = m.geometry;
  const int d = g.dim;
  WeightFn w;
  w.tag = "knudsen_maxwell";
  w.provenance = "Knudsen gas R1: (e^2 + diam/(alpha1 |v|) - tau(x,-v))^i log(...)^(-1.6 d/(d+1))";
  w.params = {{"i", i_exp}, {"alpha1", alpha1}};
  w.eval = [g, d, i_exp, alpha1](const PhaseState& z) {
    const double sp = norm(z.v, d);
    if (sp == 0.0) return std::numeric_limits<double>::infinity();
    const double back = first_collision_time(z.x, scaled(-1.0, z.v), g);
    const double s = std::exp(2.0) + g.diameter() / (alpha1 * sp) - back;
    return std::pow(s, i_exp) * std::pow(std::log(s), -1.6 * d / (d + 1.0));
  };
  return w;
}

inline WeightFn weight_knudsen_cl(const KnudsenGas& m, double eps) {
  require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
  const Geometry g = m.geometry;
  const int d = g.dim;
  WeightFn w;
  w.tag = "knudsen_cl";
  w.provenance = "Knudsen gas R2: (1 + tau(x,v) + sqrt|v|)^(d - eps)";
  w.params = {{"eps", eps}};
  w.eval = [g, d, eps](const PhaseState& z) {
    const double sp = norm(z.v, d);
    const double tau = sp == 0.0 ? 0.0 : first_collision_time(z.x, z.v, g);
    return std::pow(1.0 + tau + std::sqrt(sp), d - eps);
  };
  return w;
}

}  // namespace detail

// Weight for a model and regime tag; free parameters come from params (defaults listed per tag).
inline WeightFn weight_catalog(const ModelSpec& model, const std::string& tag, const WeightParams& params = {}) {
  using detail::get_or;
  if (tag == "one") return detail::weight_one();
  if (tag == "bgk_r2" || tag == "bgk_r3") {
    auto p = std::get_if<LinearBGK>(&model);
    if (!p || p->torus) detail::bad_tag(tag, model);
    WeightFn base = detail::weight_bgk_r2(p->potential);
    if (tag == "bgk_r2") return base;
    const double xi = get_or(params, "xi", 0.5);
    require(xi > 0.0 && xi < 1.0, "xi must lie in (0,1)");
    return detail::weight_power_of(base, xi, "bgk_r3", "linear BGK R3: (1 + H + x.v/4 + |x|^2/8)^xi");
  }
  if (tag == "lboltz_r1" || tag == "lboltz_r2" || tag == "lboltz_r3") {
    auto p = std::get_if<LinearBoltzmann>(&model);
    if (!p) detail::bad_tag(tag, model);
    const int r = tag.back() - '0';
    if (r > 1 && p->torus) detail::bad_tag(tag, model);
    const double a = get_or(params, "alpha", 0.25), b = get_or(params, "beta", 1.0);
    if (r == 3) require(0.5 * a * a <= p->potential.min_value() + b, "lboltz_r3 requires alpha^2/2 <= min Phi + beta");
    return detail::weight_lboltz(p->potential, r, a, b);
  }
  if (tag == "kfp_r2") {
    auto p = std::get_if<KineticFokkerPlanck>(&model);
    if (!p) detail::bad_tag(tag, model);
    return detail::weight_kfp(*p, get_or(params, "chi", 0.25), get_or(params, "eps", 0.5));
  }
  if (tag == "fhn") {
    if (!std::holds_alternative<FitzHughNagumo>(model)) detail::bad_tag(tag, model);
    return detail::weight_fhn(get_or(params, "chi", 0.75));
  }
  if (tag == "run_tumble" || tag == "run_tumble_exp") {
    auto p = std::get_if<RunTumble>(&model);
    if (!p) detail::bad_tag(tag, model);
    if (tag == "run_tumble_exp") return detail::weight_run_tumble_exp(get_or(params, "omega", 0.5 * p->alpha));
    const RunTumbleConstants c = run_tumble_constants(*p);
    return detail::weight_run_tumble(*p, get_or(params, "gamma", c.gamma), get_or(params, "beta", c.beta));
  }
  if (tag == "knudsen_maxwell" || tag == "knudsen_cl") {
    auto p = std::get_if<KnudsenGas>(&model);
    if (!p) detail::bad_tag(tag, model);
    if (tag == "knudsen_cl") return detail::weight_knudsen_cl(*p, get_or(params, "eps", 0.25));
    return detail::weight_knudsen_maxwell(*p, get_or(params, "i", p->geometry.dim + 1.0), get_or(params, "alpha1", 1.0));
  }
  detail::bad_tag(tag, model);
}

}  // namespace hk
