#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "harris_kinetics/bgk_interval.hpp"
#include "harris_kinetics/config.hpp"
#include "harris_kinetics/experiments.hpp"
#include "harris_kinetics/io.hpp"
#include "harris_kinetics/rate_calculus.hpp"
#include "harris_kinetics/verification.hpp"
#include "harris_kinetics/weights.hpp"

#ifndef HARRIS_KINETICS_VERSION
#define HARRIS_KINETICS_VERSION "dev"
#endif

namespace {

using hk::io::json;
namespace fs = std::filesystem;
namespace cfg = hk::config;

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kFail = 3, kInconclusive = 4 };

struct Run {
  fs::path out;
  std::uint64_t seed = 1;
  int threads = 1;
  std::vector<std::string> files;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
};

json parse_kv(const std::vector<std::string>& kv, const std::string& flag) {
  json j = json::object();
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw cfg::schema_error(flag + " expects key=value pairs, got '" + s + "'");
    const std::string k = s.substr(0, eq), v = s.substr(eq + 1);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      j[k] = x;
    } catch (const std::exception&) {
      throw cfg::schema_error(flag + ": value of '" + k + "' is not a number");
    }
  }
  return j;
}

// ---------------------------------------------------------------------------

int cmd_rates(const json& c, Run& run) {
  json out = json::object();
  bool any = false;
  if (c.contains("doeblin")) {
    const json& s = c["doeblin"];
    out["doeblin"] = cfg::to_json(hk::doeblin_rate({cfg::get<double>(s, "alpha", "doeblin."), cfg::get<double>(s, "tau", "doeblin.")}));
    any = true;
  }
  if (c.contains("drift")) {
    const json& s = c["drift"];
    const auto r = hk::drift_to_discrete(
        {cfg::get<double>(s, "zeta", "drift."), cfg::get<double>(s, "D", "drift."), cfg::get<double>(s, "tau", "drift.")});
    out["drift"] = {{"gamma", r.gamma}, {"K", r.K}, {"K_loose", r.K_loose}};
    any = true;
  }
  if (c.contains("harris")) {
    const json& s = c["harris"];
    const std::string w = "harris.";
    out["harris"] = cfg::to_json(hk::harris_rate({cfg::get<double>(s, "gamma", w), cfg::get<double>(s, "K", w),
                                                  cfg::get<double>(s, "alpha", w), cfg::get<double>(s, "R", w),
                                                  cfg::get<double>(s, "tau", w), cfg::get<double>(s, "alpha0", w),
                                                  cfg::get<double>(s, "gamma0", w)}));
    any = true;
  }
  if (c.contains("degenerate")) {
    const json& s = c["degenerate"];
    const std::string w = "degenerate.";
    out["degenerate"] =
        cfg::to_json(hk::degenerate_boltzmann_rate(cfg::get<double>(s, "beta", w), cfg::get<double>(s, "kappa", w),
                                                   cfg::get<double>(s, "tau", w), cfg::get<double>(s, "sigma_inf", w)));
    any = true;
  }
  if (c.contains("subgeometric")) {
    const json& s = c["subgeometric"];
    const std::string w = "subgeometric.";
    const auto V = hk::ConcaveRateFn::power(cfg::get<double>(s, "xi", w));
    const auto r = hk::subgeometric_envelope(V, cfg::get<double>(s, "C", w), cfg::get_or(s, "mu_phi", 1.0, w));
    const double tmax = cfg::get_or(s, "tmax", 1e4, w);
    const int n = cfg::get_or(s, "points", 200, w);
    hk::require(tmax > 1.0 && n >= 2, "subgeometric.tmax must be > 1 and points >= 2");
    hk::io::CsvWriter csv(run.file("envelope.csv"), {"t", "bound"});
    for (int i = 0; i < n; ++i) {
      const double t = std::pow(tmax, static_cast<double>(i) / (n - 1));
      csv.row(t, r(t));
    }
    out["subgeometric"] = cfg::to_json(r);
    any = true;
  }
  if (!any) throw cfg::schema_error("rates needs at least one of doeblin, drift, harris, degenerate, subgeometric");
  hk::io::write_json(run.file("rates.json"), out);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

// Dirac at the centre of the position domain; Knudsen particles start moving along e1.
hk::PhaseState default_dirac(const hk::ModelSpec& model) {
  const int d = hk::model_dim(model);
  hk::PhaseState s = hk::make_state(d, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  if (hk::toroidal(model))
    for (int i = 0; i < d; ++i) s.x[i] = 0.5;
  if (auto k = std::get_if<hk::KnudsenGas>(&model)) {
    if (k->geometry.kind != hk::Geometry::Kind::disk)
      for (int i = 0; i < d; ++i) s.x[i] = 0.5 * (k->geometry.lo[i] + k->geometry.hi[i]);
    s.v[0] = 1.0;
  }
  return s;
}

hk::InitSpec init_from_json(const json& c, int d) {
  if (!c.contains("init")) return hk::EquilibriumInit{};
  const json& j = c["init"];
  const auto kind = cfg::get<std::string>(j, "kind", "init.");
  if (kind == "equilibrium") return hk::EquilibriumInit{};
  if (kind == "dirac") return hk::DiracInit{cfg::state_from_json(j, d)};
  throw cfg::schema_error("init.kind must be dirac or equilibrium");
}

int cmd_simulate(const json& c, Run& run) {
  const auto model = cfg::model_from_json(cfg::field(c, "model", ""));
  const int d = hk::model_dim(model);
  const long N = cfg::get<long>(c, "N");
  const auto t_grid = cfg::time_grid_from_json(cfg::field(c, "t_grid", ""));
  std::vector<std::string> header{"traj_id", "t"};
  for (int i = 1; i <= d; ++i) header.push_back("x" + std::to_string(i));
  for (int i = 1; i <= d; ++i) header.push_back("v" + std::to_string(i));
  hk::io::CsvWriter csv(run.file("snapshots.csv"), header);
  std::vector<double> row(2 + 2 * d);
  hk::for_each_snapshot(model, init_from_json(c, d), N, t_grid, run.seed, run.threads, [&](const hk::EnsembleSnapshot& s) {
    for (std::size_t i = 0; i < s.states.size(); ++i) {
      row[0] = static_cast<double>(i);
      row[1] = s.t;
      for (int k = 0; k < d; ++k) row[2 + k] = s.states[i].x[k], row[2 + d + k] = s.states[i].v[k];
      csv.row_values(row);
    }
  });
  std::cout << "wrote " << t_grid.size() << " snapshots of " << N << " trajectories\n";
  return kOk;
}

int cmd_verify_drift(const json& c, Run& run) {
  const auto model = cfg::model_from_json(cfg::field(c, "model", ""));
  const auto phi = hk::weight_catalog(model, cfg::get<std::string>(c, "weight"),
                                      cfg::weight_params_from_json(c.value("weight_params", json())));
  hk::DriftOptions opt;
  if (c.contains("zeta")) opt.zeta_target = cfg::get<double>(c, "zeta");
  if (c.contains("D")) opt.D_target = cfg::get<double>(c, "D");
  const auto sampler = cfg::get_or<std::string>(c, "sampler", "grid");
  if (sampler != "grid" && sampler != "random") throw cfg::schema_error("sampler must be grid or random");
  opt.sampler = sampler == "grid" ? hk::DriftOptions::Sampler::grid : hk::DriftOptions::Sampler::random;
  opt.n = cfg::get_or(c, "n", opt.n);
  opt.n_far = cfg::get_or(c, "n_far", opt.n_far);
  opt.phi_level = cfg::get_or(c, "phi_level", opt.phi_level);
  opt.seed = run.seed;
  opt.threads = run.threads;
  const auto rep = hk::drift_verify(model, phi, opt);
  json j = cfg::to_json(rep);
  j["weight"] = {{"tag", phi.tag}, {"provenance", phi.provenance}};
  for (const auto& [k, v] : phi.params) j["weight"]["params"][k] = v;
  hk::io::write_json(run.file("drift.json"), j);
  std::cout << rep.message << '\n';
  return rep.pass ? kOk : kFail;
}

hk::MinorisationOptions minorisation_options(const json& c, const hk::ModelSpec& model, const Run& run) {
  const int k = 2 * hk::model_dim(model);
  hk::MinorisationOptions opt;
  opt.tau = cfg::get<double>(c, "tau", "minorisation.");
  opt.eta_box = cfg::box_from_json(cfg::field(c, "eta_box", "minorisation."), k, "eta_box");
  opt.init_box = cfg::box_from_json(cfg::field(c, "init_box", "minorisation."), k, "init_box");
  opt.bins = cfg::get_or(c, "bins", opt.bins);
  opt.n_paths = cfg::get_or(c, "n_paths", opt.n_paths);
  opt.n_init = cfg::get_or(c, "n_init", opt.n_init);
  opt.confidence = cfg::get_or(c, "confidence", opt.confidence);
  opt.seed = run.seed;
  opt.threads = run.threads;
  return opt;
}

int cmd_minorisation(const json& c, Run& run) {
  const auto model = cfg::model_from_json(cfg::field(c, "model", ""));
  auto opt = minorisation_options(c, model, run);
  std::optional<hk::WeightFn> phi;
  if (c.contains("weight")) {
    phi = hk::weight_catalog(model, cfg::get<std::string>(c, "weight"), cfg::weight_params_from_json(c.value("weight_params", json())));
    opt.phi = &*phi;
    opt.R = cfg::get<double>(c, "R");
  }
  const auto rep = hk::minorisation_estimate(model, opt);
  json j = cfg::to_json(rep);
  if (rep.alpha_hat > 0.0) j["doeblin"] = cfg::to_json(hk::doeblin_rate({rep.alpha_hat, rep.tau}));
  hk::io::write_json(run.file("minorisation.json"), j);
  std::cout << "alpha_hat = " << rep.alpha_hat << " (raw " << rep.alpha_raw << ")" << (rep.diagnostic.empty() ? "" : "; ")
            << rep.diagnostic << '\n';
  return rep.alpha_hat > 0.0 ? kOk : kInconclusive;
}

std::vector<hk::Vec> velocity_set(const json& c, int d) {
  std::vector<hk::Vec> vs;
  if (c.contains("velocities")) {
    for (const auto& v : c["velocities"]) {
      if (!v.is_array() || static_cast<int>(v.size()) != d) throw cfg::schema_error("velocities entries need d components");
      hk::Vec w{0.0, 0.0, 0.0};
      for (int i = 0; i < d; ++i) w[i] = v[i].get<double>();
      vs.push_back(w);
    }
    return vs;
  }
  // tensor product of per-axis value lists
  const json& axes = cfg::field(c, "v_axes", "");
  if (!axes.is_array() || static_cast<int>(axes.size()) != d) throw cfg::schema_error("v_axes needs one list per dimension");
  std::vector<std::vector<double>> a;
  for (const auto& x : axes) a.push_back(x.get<std::vector<double>>());
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    hk::Vec w{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) w[i] = a[i][idx[i]];
    vs.push_back(w);
    int i = 0;
    while (i < d && ++idx[i] == a[i].size()) idx[i++] = 0;
    if (i == d) break;
  }
  return vs;
}

int cmd_gcc(const json& c, Run& run) {
  const int d = cfg::get<int>(c, "d");
  const auto sigma = cfg::SigmaSpec::from_json(cfg::field(c, "sigma", ""));
  const auto pot = cfg::potential_from_json(c.value("potential", json()));
  const double T = cfg::get<double>(c, "T");
  const int x_grid = cfg::get<int>(c, "x_grid");
  const int n_steps = cfg::get_or(c, "n_steps", 1000);
  const auto rep = hk::gcc_check(sigma.fn(), pot, d, T, x_grid, velocity_set(c, d), n_steps, run.threads);
  json j = cfg::to_json(rep);
  hk::io::write_json(run.file("gcc.json"), j);
  hk::io::CsvWriter csv(run.file("gcc.csv"), {"T", "kappa_hat"});
  csv.row(rep.T, rep.kappa_hat);
  std::cout << "kappa_hat = " << rep.kappa_hat << " over " << rep.grid << '\n';
  return rep.kappa_hat > 0.0 ? kOk : kInconclusive;
}

hk::Projection projection_from_name(const std::string& s) {
  if (s == "speed") return {hk::Projection::Kind::speed, 0};
  if (s == "radius") return {hk::Projection::Kind::radius, 0};
  if (s.size() == 2 && (s[0] == 'x' || s[0] == 'v') && s[1] >= '1' && s[1] <= '3')
    return {s[0] == 'x' ? hk::Projection::Kind::x : hk::Projection::Kind::v, s[1] - '1'};
  throw cfg::schema_error("projection '" + s + "' must be x1..x3, v1..v3, speed or radius");
}

int cmd_tv_decay(const json& c, Run& run) {
  const auto model = cfg::model_from_json(cfg::field(c, "model", ""));
  const int d = hk::model_dim(model);
  const auto phi = hk::weight_catalog(model, cfg::get_or<std::string>(c, "weight", "one"),
                                      cfg::weight_params_from_json(c.value("weight_params", json())));
  hk::TvDecayOptions opt;
  opt.N = cfg::get<long>(c, "N");
  opt.t_grid = cfg::time_grid_from_json(cfg::field(c, "t_grid", ""));
  for (const auto& p : c.value("projections", json::array())) opt.projections.push_back(projection_from_name(p.get<std::string>()));
  opt.bins = cfg::get_or(c, "bins", opt.bins);
  const auto kind = cfg::get_or<std::string>(c, "fit_kind", "exponential");
  if (kind != "exponential" && kind != "power") throw cfg::schema_error("fit_kind must be exponential or power");
  opt.fit_kind = kind == "power" ? hk::FitResult::Kind::power : hk::FitResult::Kind::exponential;
  opt.fit_tmin = cfg::get_or(c, "fit_tmin", 0.0);
  opt.noise_factor = cfg::get_or(c, "noise_factor", 3.0);
  opt.seed = run.seed;
  opt.threads = run.threads;
  const hk::InitSpec init = c.contains("init") ? init_from_json(c, d) : hk::InitSpec{hk::DiracInit{default_dirac(model)}};
  const auto curve = hk::tv_decay(model, init, phi, opt);

  {
    hk::io::CsvWriter csv(run.file("decay.csv"), {"t", "tv", "phi_tag"});
    for (std::size_t i = 0; i < curve.times.size(); ++i) csv.row(curve.times[i], curve.values[i], curve.phi_tag);
  }
  json j{{"phi_tag", curve.phi_tag},
         {"convention", curve.convention},
         {"reference", curve.reference},
         {"noise", curve.noise},
         {"clipped", curve.clipped},
         {"warnings", curve.warnings}};
  j["fit"] = curve.fit ? cfg::to_json(*curve.fit) : json();

  std::vector<hk::io::SvgSeries> series{{curve.times, curve.values, "measured", "#1f77b4", false}};
  if (curve.fit) {
    hk::io::SvgSeries f{{}, {}, "fit", "#d62728", true};
    for (double t : curve.times) {
      const double x = kind == "power" ? std::log1p(t) : t;
      f.x.push_back(t);
      f.y.push_back(std::exp(curve.fit->intercept - curve.fit->rate_or_exponent * x));
    }
    series.push_back(f);
  }
  if (c.contains("theory") && curve.fit) {
    const json& th = c["theory"];
    const auto mo = minorisation_options(cfg::field(th, "minorisation", "theory."), model, run);
    const auto mrep = hk::minorisation_estimate(model, mo);
    j["theory"]["minorisation"] = cfg::to_json(mrep);
    if (mrep.alpha_hat > 0.0) {
      const auto bound = hk::doeblin_rate({mrep.alpha_hat, mrep.tau});
      const auto cmp = hk::compare_to_theory(curve, bound);
      j["theory"]["bound"] = cfg::to_json(bound);
      j["theory"]["comparison"] = cfg::to_json(cmp);
      j["theory"]["lambda_consistent"] = bound.lambda <= curve.fit->rate_or_exponent + curve.fit->half_width;
      hk::io::SvgSeries b{{}, {}, "theory bound", "#2ca02c", true};
      for (double t : curve.times) b.x.push_back(t), b.y.push_back(bound(t) * curve.values.front());
      series.push_back(b);
    }
  }
  hk::io::SvgOptions so;
  so.title = hk::model_name(model) + " decay (" + curve.phi_tag + ")";
  so.y_label = phi.constant ? "TV" : "weighted L1";
  so.log_x = kind == "power";
  hk::io::write_svg(run.file("decay.svg"), series, so);
  hk::io::write_json(run.file("fit.json"), j);
  if (curve.fit)
    std::cout << hk::fit_kind_name(curve.fit->kind) << " fit: " << curve.fit->rate_or_exponent << " +- "
              << curve.fit->half_width << ", residual " << curve.fit->residual << '\n';
  else
    std::cout << "no fit: too few points above the noise floor\n";
  return curve.fit ? kOk : kInconclusive;
}

int cmd_steady(const json& c, Run& run) {
  const double T0 = cfg::get<double>(c, "T0"), T1 = cfg::get<double>(c, "T1"), kappa = cfg::get<double>(c, "kappa");
  const int Nx = cfg::get_or(c, "Nx", 64), Nv = cfg::get_or(c, "Nv", 128);
  const double vmax = cfg::get_or(c, "v_max", 8.0 * std::sqrt(std::max(T0, T1)));
  const auto grid = hk::Grid1D::make(Nx, Nv, vmax);
  const auto rep = hk::solve_steady(T0, T1, kappa, grid, cfg::get_or(c, "tol", 1e-10), cfg::get_or(c, "max_iter", 20000));
  {
    hk::io::CsvWriter csv(run.file("steady.csv"), {"x", "rho", "u", "P", "T"});
    for (int i = 0; i < Nx; ++i) csv.row(rep.x[i], rep.rho[i], rep.u[i], rep.P[i], rep.T[i]);
  }
  {
    hk::io::CsvWriter csv(run.file("f.csv"), {"x", "v", "f"});
    for (int i = 0; i < Nx; ++i)
      for (int j = 0; j < Nv; ++j) csv.row(rep.x[i], grid.v[j], rep.f_at(i, j, Nv));
  }
  hk::io::write_json(run.file("steady.json"), cfg::to_json(rep));
  double umax = 0.0;
  for (double u : rep.u) umax = std::max(umax, std::abs(u));
  std::cout << (rep.converged ? "converged" : "NOT converged") << " after " << rep.iterations
            << " sweeps, residual " << rep.residual << ", max |u| = " << umax << '\n';
  return rep.converged ? kOk : kInconclusive;
}

using Command = int (*)(const json&, Run&);

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m = {
      {"rates", cmd_rates},       {"simulate", cmd_simulate}, {"verify-drift", cmd_verify_drift},
      {"minorisation", cmd_minorisation}, {"gcc", cmd_gcc},   {"tv-decay", cmd_tv_decay},
      {"steady", cmd_steady}};
  return m;
}

// Runs one subcommand against a fully resolved config and writes manifest.json.
int execute(const std::string& name, json config, Run& run) {
  if (config.contains("model")) config["model"] = cfg::resolve_model(config["model"]);
  config["seed"] = run.seed;
  fs::create_directories(run.out);
  hk::io::RunManifest man;
  man.subcommand = name;
  man.config = config;
  man.master_seed = run.seed;
  man.tool_version = HARRIS_KINETICS_VERSION;
  man.started = hk::io::utc_now();
  const int code = commands().at(name)(config, run);
  man.finished = hk::io::utc_now();
  for (const auto& f : run.files) man.outputs.push_back({f, hk::io::sha256_file(run.out / f)});
  hk::io::write_json(run.out / "manifest.json", man.to_json());
  return code;
}

int replay(const fs::path& manifest_path, Run& run) {
  const auto man = hk::io::RunManifest::from_json(hk::io::read_json(manifest_path));
  if (!commands().count(man.subcommand)) throw cfg::schema_error("manifest names unknown subcommand '" + man.subcommand + "'");
  run.seed = man.master_seed;
  const int code = execute(man.subcommand, man.config, run);
  bool same = true;
  json diff = json::array();
  for (const auto& o : man.outputs) {
    if (fs::path(o.name).extension() != ".csv") continue;
    const auto h = hk::io::sha256_file(run.out / o.name);
    const bool eq = h == o.sha256;
    same = same && eq;
    diff.push_back({{"file", o.name}, {"identical", eq}});
  }
  std::cout << json{{"replay", man.subcommand}, {"csv", diff}, {"bit_identical", same}}.dump() << '\n';
  if (!same) return kFail;
  return code;
}

void error_json(const std::string& kind, const std::string& msg) {
  std::cerr << json{{"error", kind}, {"message", msg}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harris-type rate calculus and kinetic model workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HARRIS_KINETICS_VERSION);

  std::string config_path, out_dir;
  std::uint64_t seed = 1;
  int threads = hk::default_threads();
  bool seed_given = false;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sc->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_given = true; });
    sc->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sc->add_option("--out", out_dir, "output directory (default $HARRIS_KINETICS_OUT or ./harris_kinetics_out)");
  };

  std::map<std::string, CLI::App*> sub;
  for (const auto& [name, fn] : commands()) {
    sub[name] = app.add_subcommand(name, "run " + name);
    common(sub[name]);
  }

  std::map<std::string, std::vector<std::string>> rate_kv;
  for (const char* k : {"doeblin", "drift", "harris", "degenerate", "subgeometric"})
    sub["rates"]->add_option(std::string("--") + k, rate_kv[k], "key=value pairs")->expected(1, -1);

  std::string model, weight, fit_kind;
  std::optional<long> N;
  std::optional<double> tmax, zeta, D, T0, T1, kappa;
  for (const char* s : {"simulate", "verify-drift", "minorisation", "tv-decay"})
    sub[s]->add_option("--model", model, "model preset name");
  for (const char* s : {"simulate", "tv-decay"}) {
    sub[s]->add_option("--N", N, "ensemble size");
    sub[s]->add_option("--tmax", tmax, "final time");
  }
  for (const char* s : {"verify-drift", "tv-decay", "minorisation"}) sub[s]->add_option("--weight", weight, "weight tag");
  sub["verify-drift"]->add_option("--zeta", zeta, "target zeta");
  sub["verify-drift"]->add_option("--D", D, "target D");
  sub["tv-decay"]->add_option("--fit", fit_kind, "exponential or power");
  sub["steady"]->add_option("--T0", T0, "left wall temperature");
  sub["steady"]->add_option("--T1", T1, "right wall temperature");
  sub["steady"]->add_option("--kappa", kappa, "Knudsen number");

  std::string manifest;
  auto* rp = app.add_subcommand("replay", "re-run a manifest and compare CSV hashes");
  rp->add_option("manifest", manifest, "manifest.json of a previous run")->required()->check(CLI::ExistingFile);
  rp->add_option("--out", out_dir, "output directory for the re-run")->required();
  rp->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    Run run;
    run.threads = threads;
    if (rp->parsed()) {
      run.out = out_dir;
      return replay(manifest, run);
    }
    std::string name;
    for (const auto& [n, sc] : sub)
      if (sc->parsed()) name = n;

    json c = config_path.empty() ? json::object() : hk::io::read_json(config_path);
    if (!c.is_object()) throw cfg::schema_error("config must be a JSON object");
    if (!seed_given && c.contains("seed")) seed = cfg::get<std::uint64_t>(c, "seed");
    for (const auto& [k, v] : rate_kv)
      if (!v.empty()) c[k] = parse_kv(v, "--" + k);
    if (!model.empty()) c["model"] = model;
    if (!weight.empty()) c["weight"] = weight;
    if (!fit_kind.empty()) c["fit_kind"] = fit_kind;
    if (N) c["N"] = *N;
    if (tmax) {
      const double step = c.contains("t_grid") && c["t_grid"].is_object() ? c["t_grid"].value("step", 0.25) : 0.25;
      c["t_grid"] = {{"step", step}, {"tmax", *tmax}};
    }
    if (zeta) c["zeta"] = *zeta;
    if (D) c["D"] = *D;
    if (T0) c["T0"] = *T0;
    if (T1) c["T1"] = *T1;
    if (kappa) c["kappa"] = *kappa;

    run.seed = seed;
    if (!out_dir.empty())
      run.out = out_dir;
    else if (const char* env = std::getenv("HARRIS_KINETICS_OUT"))
      run.out = fs::path(env) / name;
    else
      run.out = fs::path("harris_kinetics_out") / name;
    return execute(name, c, run);
  } catch (const hk::invalid_input& e) {
    error_json("invalid_input", e.what());
    return kUsage;
  } catch (const hk::constants_out_of_range& e) {
    error_json("constants_out_of_range", e.what());
    return kInconclusive;
  } catch (const hk::unsupported& e) {
    error_json("unsupported", e.what());
    return kOther;
  } catch (const std::exception& e) {
    error_json("error", e.what());
    return kOther;
  }
}
