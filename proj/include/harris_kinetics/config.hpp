#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "bgk_interval.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "models.hpp"
#include "rate_calculus.hpp"
#include "verification.hpp"
#include "weights.hpp"

namespace hk::config {

using json = io::json;

// A config field is missing or has the wrong type.
struct schema_error : invalid_input {
  using invalid_input::invalid_input;
};

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw schema_error("missing required field '" + where + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where = "") {
  const json& f = field(j, key, where);
  try {
    return f.get<T>();
  } catch (const json::exception&) {
    throw schema_error("field '" + where + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const std::string& key, T def, const std::string& where = "") {
  if (!j.is_object() || !j.contains(key)) return def;
  return get<T>(j, key, where);
}

// ---------------------------------------------------------------------------
// Collision rate profiles on the torus

// constant: sigma = value
// strip_bump: sigma = height exp(1 - 1/(1 - s^2)), s = periodic distance of x_axis to centre / half_width
struct SigmaSpec {
  std::string kind = "constant";
  double value = 1.0;
  double center = 0.5;
  double half_width = 0.25;
  double height = 1.0;
  int axis = 0;

  std::function<double(const Vec&)> fn() const {
    if (kind == "constant") {
      const double c = value;
      return [c](const Vec&) { return c; };
    }
    const SigmaSpec s = *this;
    return [s](const Vec& x) {
      double dx = std::abs(x[s.axis] - s.center);
      dx = std::min(dx, 1.0 - dx);
      const double u = dx / s.half_width;
      if (u >= 1.0) return 0.0;
      return s.height * std::exp(1.0 - 1.0 / (1.0 - u * u));
    };
  }

  double sup() const { return kind == "constant" ? value : height; }

  json to_json() const {
    if (kind == "constant") return {{"kind", kind}, {"value", value}};
    return {{"kind", kind}, {"center", center}, {"half_width", half_width}, {"height", height}, {"axis", axis}};
  }

  static SigmaSpec from_json(const json& j) {
    SigmaSpec s;
    s.kind = get<std::string>(j, "kind", "sigma.");
    if (s.kind == "constant") {
      s.value = get<double>(j, "value", "sigma.");
      require(s.value >= 0.0, "sigma.value must be >= 0");
    } else if (s.kind == "strip_bump") {
      s.center = get_or(j, "center", 0.5, "sigma.");
      s.half_width = get_or(j, "half_width", 0.25, "sigma.");
      s.height = get_or(j, "height", 1.0, "sigma.");
      s.axis = get_or(j, "axis", 0, "sigma.");
      require(s.half_width > 0.0 && s.half_width <= 0.5, "sigma.half_width must lie in (0, 0.5]");
      require(s.height >= 0.0, "sigma.height must be >= 0");
    } else {
      throw schema_error("sigma.kind must be 'constant' or 'strip_bump'");
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Models

inline Potential potential_from_json(const json& j) {
  if (j.is_null()) return Potential::none();
  const auto fam = get<std::string>(j, "family", "potential.");
  if (fam == "none") return Potential::none();
  if (fam == "power") return Potential::power(get<double>(j, "gamma_exp", "potential."));
  if (fam == "quadratic") return Potential::quadratic(get_or(j, "k", 1.0, "potential."));
  if (fam == "cosine") return Potential::cosine(get<double>(j, "amplitude", "potential."));
  throw schema_error("potential.family must be one of none, power, quadratic, cosine");
}

inline Geometry geometry_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind", "geometry.");
  if (kind == "interval") return Geometry::interval(get_or(j, "a", 0.0), get_or(j, "b", 1.0));
  if (kind == "disk") return Geometry::disk(get_or(j, "radius", 1.0, "geometry."));
  if (kind == "box") {
    const int d = get<int>(j, "dim", "geometry.");
    Vec lo{0.0, 0.0, 0.0}, hi{1.0, 1.0, 1.0};
    if (j.contains("lo"))
      for (int i = 0; i < d; ++i) lo[i] = j.at("lo").at(i).get<double>();
    if (j.contains("hi"))
      for (int i = 0; i < d; ++i) hi[i] = j.at("hi").at(i).get<double>();
    return Geometry::box(d, lo, hi);
  }
  throw schema_error("geometry.kind must be one of interval, disk, box");
}

inline BoundarySpec boundary_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind", "boundary.");
  if (kind == "diffuse") return DiffuseWall{};
  if (kind == "absorbing") return AbsorbingWall{};
  if (kind == "maxwell") {
    const double a = get<double>(j, "accommodation", "boundary.");
    require(a >= 0.0 && a <= 1.0, "boundary.accommodation must lie in [0,1]");
    MaxwellWall w;
    w.accommodation = [a](const Vec&) { return a; };
    return w;
  }
  if (kind == "cercignani_lampis") {
    CercignaniLampisWall w{get<double>(j, "r_perp", "boundary."), get<double>(j, "r_par", "boundary.")};
    validate(w);
    return w;
  }
  throw schema_error("boundary.kind must be one of diffuse, absorbing, maxwell, cercignani_lampis");
}

inline ModelSpec model_from_json(const json& j) {
  const auto kind = get<std::string>(j, "kind", "model.");
  ModelSpec m;
  if (kind == "linear_bgk") {
    LinearBGK s;
    s.d = get_or(j, "d", 1, "model.");
    s.torus = get_or(j, "torus", true, "model.");
    s.potential = potential_from_json(j.value("potential", json()));
    m = s;
  } else if (kind == "kinetic_fokker_planck") {
    KineticFokkerPlanck s;
    s.d = get_or(j, "d", 1, "model.");
    if (j.contains("potential")) s.potential = potential_from_json(j.at("potential"));
    s.beta_friction = get_or(j, "beta_friction", 2.0, "model.");
    s.dt = get_or(j, "dt", 0.05, "model.");
    m = s;
  } else if (kind == "linear_boltzmann") {
    LinearBoltzmann s;
    s.d = get_or(j, "d", 1, "model.");
    s.gamma_hard = get_or(j, "gamma_hard", 0.0, "model.");
    s.b_const = get_or(j, "b_const", 1.0, "model.");
    s.torus = get_or(j, "torus", true, "model.");
    s.potential = potential_from_json(j.value("potential", json()));
    m = s;
  } else if (kind == "knudsen_gas") {
    const Geometry g = geometry_from_json(field(j, "geometry", "model."));
    const BoundarySpec b = boundary_from_json(field(j, "boundary", "model."));
    const json& T = field(j, "wall_temperature", "model.");
    if (T.is_number()) {
      m = KnudsenGas::with_constant_temperature(g, b, T.get<double>());
    } else {
      const double t0 = get<double>(T, "T_min", "model.wall_temperature."), t1 = get<double>(T, "T_max", "model.wall_temperature.");
      require(t0 > 0.0 && t1 >= t0, "wall temperature needs 0 < T_min <= T_max");
      KnudsenGas k;
      k.geometry = g;
      k.boundary = b;
      const double lo = g.kind == Geometry::Kind::disk ? -g.radius : g.lo[0];
      const double hi = g.kind == Geometry::Kind::disk ? g.radius : g.hi[0];
      k.wall_temp = [=](const Vec& x) { return t0 + (t1 - t0) * std::clamp((x[0] - lo) / (hi - lo), 0.0, 1.0); };
      k.uniform_temperature.reset();
      m = k;
    }
  } else if (kind == "degenerate_boltzmann") {
    DegenerateBoltzmann s;
    s.d = get_or(j, "d", 1, "model.");
    const SigmaSpec sig = SigmaSpec::from_json(field(j, "sigma", "model."));
    s.sigma = sig.fn();
    s.sigma_inf = sig.sup();
    const auto sc = get_or<std::string>(j, "scatter", "uniform", "model.");
    if (sc != "uniform" && sc != "maxwellian") throw schema_error("model.scatter must be uniform or maxwellian");
    s.scatter = sc == "uniform" ? DegenerateBoltzmann::Scatter::uniform : DegenerateBoltzmann::Scatter::maxwellian;
    s.v_max = get_or(j, "v_max", 1.0, "model.");
    s.potential = potential_from_json(j.value("potential", json()));
    m = s;
  } else if (kind == "run_tumble") {
    RunTumble s;
    s.d = get_or(j, "d", 2, "model.");
    s.chi = get_or(j, "chi", 0.5, "model.");
    const auto psi = get_or<std::string>(j, "psi", "tanh", "model.");
    if (psi != "tanh" && psi != "sign") throw schema_error("model.psi must be tanh or sign");
    s.psi = psi == "tanh" ? RunTumble::Psi::tanh : RunTumble::Psi::sign;
    s.alpha = get_or(j, "alpha", 1.0, "model.");
    s.R0 = get_or(j, "R0", 1.0 / std::sqrt(std::numbers::pi), "model.");
    m = s;
  } else if (kind == "fitzhugh_nagumo") {
    FitzHughNagumo s;
    s.a = get_or(j, "a", 1.0, "model.");
    s.b = get_or(j, "b", 1.0, "model.");
    s.c = get_or(j, "c", 1.0, "model.");
    s.dt = get_or(j, "dt", 0.01, "model.");
    m = s;
  } else {
    throw schema_error("model.kind '" + kind + "' is unknown");
  }
  validate(m);
  return m;
}

// Named model configurations accepted wherever a model object is expected.
inline const std::map<std::string, json>& model_presets() {
  static const std::map<std::string, json> p = {
      {"torus_bgk", {{"kind", "linear_bgk"}, {"d", 1}, {"torus", true}, {"potential", {{"family", "none"}}}}},
      {"linear_bgk_r2",
       {{"kind", "linear_bgk"}, {"d", 1}, {"torus", false}, {"potential", {{"family", "power"}, {"gamma_exp", 2.0}}}}},
      {"kfp_quadratic",
       {{"kind", "kinetic_fokker_planck"},
        {"d", 1},
        {"potential", {{"family", "quadratic"}, {"k", 1.0}}},
        {"beta_friction", 2.0},
        {"dt", 0.05}}},
      {"linear_boltzmann",
       {{"kind", "linear_boltzmann"}, {"d", 2}, {"gamma_hard", 1.0}, {"b_const", 1.0}, {"torus", true}}},
      {"knudsen_disk",
       {{"kind", "knudsen_gas"},
        {"geometry", {{"kind", "disk"}, {"radius", 1.0}}},
        {"boundary", {{"kind", "diffuse"}}},
        {"wall_temperature", 1.0}}},
      {"degenerate_strip",
       {{"kind", "degenerate_boltzmann"},
        {"d", 2},
        {"sigma", {{"kind", "strip_bump"}, {"center", 0.5}, {"half_width", 0.25}, {"height", 1.0}}},
        {"scatter", "uniform"},
        {"v_max", 1.0}}},
      {"run_tumble",
       {{"kind", "run_tumble"},
        {"d", 2},
        {"chi", 0.5},
        {"psi", "tanh"},
        {"alpha", 1.0},
        {"R0", 1.0 / std::sqrt(std::numbers::pi)}}},
      {"fhn", {{"kind", "fitzhugh_nagumo"}, {"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"dt", 0.01}}},
  };
  return p;
}

// Replace a preset name by its object form.
inline json resolve_model(const json& j) {
  if (j.is_string()) {
    const auto& p = model_presets();
    const auto it = p.find(j.get<std::string>());
    if (it == p.end()) {
      std::string names;
      for (const auto& [k, v] : p) names += " " + k;
      throw schema_error("unknown model preset '" + j.get<std::string>() + "'; presets:" + names);
    }
    return it->second;
  }
  if (!j.is_object()) throw schema_error("field 'model' must be a preset name or an object");
  return j;
}

inline WeightParams weight_params_from_json(const json& j) {
  WeightParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw schema_error("field 'weight_params' must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw schema_error("weight_params." + k + " must be a number");
    p[k] = v.get<double>();
  }
  return p;
}

inline PhaseState state_from_json(const json& j, int d) {
  PhaseState s;
  s.dim = d;
  const json& x = field(j, "x", "state.");
  const json& v = field(j, "v", "state.");
  if (!x.is_array() || static_cast<int>(x.size()) != d || !v.is_array() || static_cast<int>(v.size()) != d)
    throw schema_error("state.x and state.v must be arrays of length d = " + std::to_string(d));
  for (int i = 0; i < d; ++i) s.x[i] = x[i].get<double>(), s.v[i] = v[i].get<double>();
  return s;
}

inline json to_json(const PhaseState& s) {
  json x = json::array(), v = json::array();
  for (int i = 0; i < s.dim; ++i) x.push_back(s.x[i]), v.push_back(s.v[i]);
  return {{"x", x}, {"v", v}, {"t", s.t}};
}

inline PhaseBox box_from_json(const json& j, int k, const std::string& name) {
  PhaseBox b;
  b.lo = get<std::vector<double>>(j, "lo", name + ".");
  b.hi = get<std::vector<double>>(j, "hi", name + ".");
  if (static_cast<int>(b.lo.size()) != k || static_cast<int>(b.hi.size()) != k)
    throw schema_error(name + ".lo and " + name + ".hi need " + std::to_string(k) + " entries (x1..xd, v1..vd)");
  return b;
}

// t_grid either explicit or {"step": h, "tmax": T}; optional "coarse_step" beyond "coarse_from".
inline std::vector<double> time_grid_from_json(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  const double h = get<double>(j, "step", "t_grid.");
  const double tmax = get<double>(j, "tmax", "t_grid.");
  require(h > 0.0 && tmax > 0.0, "t_grid.step and t_grid.tmax must be > 0");
  const double from = get_or(j, "coarse_from", tmax, "t_grid.");
  const double H = get_or(j, "coarse_step", h, "t_grid.");
  std::vector<double> t;
  require(H > 0.0, "t_grid.coarse_step must be > 0");
  const double fine_end = std::min(from, tmax);
  for (long i = 0; i * h <= fine_end + 1e-9 * h; ++i) t.push_back(i * h);
  const double base = t.back();
  for (long i = 1; base + i * H <= tmax + 1e-9 * H; ++i) t.push_back(base + i * H);
  return t;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RateBound& r) {
  json j;
  j["kind"] = r.kind == RateBound::Kind::geometric ? "geometric" : "subgeometric";
  j["C"] = r.C;
  if (r.kind == RateBound::Kind::geometric) j["lambda"] = r.lambda;
  json in = json::object();
  for (const auto& [k, v] : r.provenance.inputs) in[k] = v;
  j["provenance"] = {{"theorem", r.provenance.theorem},
                     {"inputs", in},
                     {"paper_verbatim", r.provenance.paper_verbatim},
                     {"note", r.provenance.note}};
  return j;
}

inline json to_json(const DriftReport& r) {
  json j{{"pass", r.pass},
         {"degenerate", r.degenerate},
         {"zeta_hat", r.zeta_hat},
         {"D_hat", r.D_hat},
         {"margin", r.margin},
         {"worst_point", to_json(r.worst_point)},
         {"worst_shell", r.worst_shell},
         {"n_samples", r.n_samples},
         {"box_halfwidth", r.box_halfwidth},
         {"sampling", r.sampling},
         {"message", r.message}};
  j["D_target"] = r.D_target ? json(*r.D_target) : json();
  return j;
}

inline json to_json(const MinorisationReport& r) {
  json pts = json::array();
  for (const auto& p : r.initial_points) pts.push_back(to_json(p));
  return {{"alpha_hat", r.alpha_hat},
          {"alpha_raw", r.alpha_raw},
          {"tau", r.tau},
          {"alpha_per_init", r.alpha_per_init},
          {"initial_points", pts},
          {"eta_box", {{"lo", r.eta_box.lo}, {"hi", r.eta_box.hi}}},
          {"bins_per_coord", r.bins_per_coord},
          {"n_bins", r.n_bins},
          {"n_paths", r.n_paths},
          {"empty_bins", r.empty_bins},
          {"empty_bin_examples", r.empty_bin_examples},
          {"small_set", r.small_set},
          {"diagnostic", r.diagnostic}};
}

inline json to_json(const GccReport& r) {
  return {{"kappa_hat", r.kappa_hat}, {"T", r.T},           {"with_potential", r.with_potential},
          {"argmin", to_json(r.argmin)}, {"x_grid", r.x_grid}, {"n_velocities", r.n_velocities},
          {"n_steps", r.n_steps},     {"grid", r.grid}};
}

inline json to_json(const FitResult& f) {
  return {{"kind", fit_kind_name(f.kind)},
          {"rate_or_exponent", f.rate_or_exponent},
          {"intercept", f.intercept},
          {"residual", f.residual},
          {"half_width", f.half_width},
          {"window", {f.first, f.last}}};
}

inline json to_json(const ComparisonReport& r) {
  return {{"verdict", verdict_name(r.verdict)}, {"times", r.times}, {"bound", r.bound},
          {"measured", r.measured},            {"ratio", r.ratio}, {"message", r.message}};
}

inline json to_json(const SteadyStateReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"R0", r.R0},
          {"R1", r.R1},
          {"flux_balance", {r.flux_balance_0, r.flux_balance_1}},
          {"regime", {{"kappa2_Tmin", r.regime_a}, {"sqrtT_gap_scaled", r.regime_b}}}};
}

}  // namespace hk::config
