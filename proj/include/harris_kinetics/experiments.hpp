#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "equilibrium.hpp"
#include "error.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "rate_calculus.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "verification.hpp"
#include "weights.hpp"

namespace hk {

// ---------------------------------------------------------------------------
// Ensembles

struct DiracInit {
  PhaseState z0;
};
struct EquilibriumInit {};
struct CustomInit {
  std::function<PhaseState(RngStream&)> sample;
};
using InitSpec = std::variant<DiracInit, EquilibriumInit, CustomInit>;

inline std::string init_name(const InitSpec& i) {
  if (std::holds_alternative<DiracInit>(i)) return "dirac";
  if (std::holds_alternative<EquilibriumInit>(i)) return "equilibrium";
  return "custom";
}

struct EnsembleSnapshot {
  double t = 0.0;
  std::vector<PhaseState> states;
  std::uint64_t master_seed = 0;
  std::string model;  // fingerprint; trajectory i uses RngStream(master_seed, i)
};

inline PhaseState initial_state(const ModelSpec& model, const InitSpec& init, RngStream& rng) {
  if (auto p = std::get_if<DiracInit>(&init)) {
    PhaseState s = p->z0;
    s.dim = model_dim(model);
    s.t = 0.0;
    return s;
  }
  if (std::holds_alternative<EquilibriumInit>(init)) {
    if (!has_explicit_equilibrium(model))
      throw invalid_input("equilibrium initial data requested for " + model_name(model) +
                          ", which has no closed-form equilibrium");
    return equilibrium_sampler(model, rng);
  }
  PhaseState s = std::get<CustomInit>(init).sample(rng);
  s.t = 0.0;
  return s;
}

// Time-major simulation; calls on_snapshot once per grid time, in order.
inline void for_each_snapshot(const ModelSpec& model, const InitSpec& init, long N, const std::vector<double>& t_grid,
                              std::uint64_t master_seed, int threads,
                              const std::function<void(const EnsembleSnapshot&)>& on_snapshot) {
  validate(model);
  require(N > 0, "N must be > 0");
  require(!t_grid.empty() && t_grid.front() == 0.0, "t_grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i) require(t_grid[i] > t_grid[i - 1], "t_grid must be strictly increasing");
  EnsembleSnapshot snap;
  snap.master_seed = master_seed;
  snap.model = model_name(model);
  snap.states.resize(N);
  std::vector<RngStream> rngs;
  rngs.reserve(N);
  for (long i = 0; i < N; ++i) rngs.emplace_back(master_seed, static_cast<std::uint64_t>(i));
  parallel_for(static_cast<std::size_t>(N), threads,
               [&](std::size_t i) { snap.states[i] = initial_state(model, init, rngs[i]); });
  snap.t = 0.0;
  on_snapshot(snap);
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double dt = t_grid[k] - t_grid[k - 1];
    parallel_for(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
      advance(model, snap.states[i], dt, rngs[i]);
      snap.states[i].t = t_grid[k];
    });
    snap.t = t_grid[k];
    on_snapshot(snap);
  }
}

inline std::vector<EnsembleSnapshot> simulate_ensemble(const ModelSpec& model, const InitSpec& init, long N,
                                                       const std::vector<double>& t_grid, std::uint64_t master_seed,
                                                       int threads = 1) {
  std::vector<EnsembleSnapshot> out;
  out.reserve(t_grid.size());
  for_each_snapshot(model, init, N, t_grid, master_seed, threads, [&](const EnsembleSnapshot& s) { out.push_back(s); });
  return out;
}

// ---------------------------------------------------------------------------
// Weighted total variation on common histograms

struct Projection {
  enum class Kind { x, v, speed, radius };
  Kind kind = Kind::x;
  int index = 0;

  double operator()(const PhaseState& s) const {
    switch (kind) {
      case Kind::x: return s.x[index];
      case Kind::v: return s.v[index];
      case Kind::speed: return norm(s.v, s.dim);
      case Kind::radius: return norm(s.x, s.dim);
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::x: return "x" + std::to_string(index + 1);
      case Kind::v: return "v" + std::to_string(index + 1);
      case Kind::speed: return "speed";
      case Kind::radius: return "radius";
    }
    return "?";
  }
};

inline std::vector<Projection> phase_projections(int d) {
  std::vector<Projection> p;
  for (int i = 0; i < d; ++i) p.push_back({Projection::Kind::x, i});
  for (int i = 0; i < d; ++i) p.push_back({Projection::Kind::v, i});
  return p;
}

struct Binning {
  std::vector<Projection> proj;
  std::vector<double> lo, hi;
  int bins = 32;

  long n_cells() const {
    long n = 1;
    for (std::size_t i = 0; i < proj.size(); ++i) n *= bins;
    return n;
  }

  // Cell index or -1 when outside the box.
  long cell(const PhaseState& s) const {
    long c = 0, mul = 1;
    for (std::size_t i = 0; i < proj.size(); ++i) {
      const double u = (proj[i](s) - lo[i]) / (hi[i] - lo[i]);
      if (!(u >= 0.0 && u <= 1.0)) return -1;
      c += mul * std::min(bins - 1, static_cast<int>(u * bins));
      mul *= bins;
    }
    return c;
  }

  PhaseState center(long c, int dim) const {
    PhaseState s;
    s.dim = dim;
    for (std::size_t i = 0; i < proj.size(); ++i) {
      const int j = static_cast<int>(c % bins);
      c /= bins;
      const double val = lo[i] + (j + 0.5) * (hi[i] - lo[i]) / bins;
      switch (proj[i].kind) {
        case Projection::Kind::x: s.x[proj[i].index] = val; break;
        case Projection::Kind::v: s.v[proj[i].index] = val; break;
        case Projection::Kind::speed: s.v[0] = val; break;
        case Projection::Kind::radius: s.x[0] = val; break;
      }
    }
    return s;
  }
};

// Box holding all but a fraction `excluded` of the pooled samples; torus positions fixed to [0,1).
inline Binning auto_binning(const std::vector<const std::vector<PhaseState>*>& ensembles,
                            const std::vector<Projection>& proj, int bins, bool torus, double excluded = 0.005) {
  require(!proj.empty(), "binning needs at least one projection");
  require(bins >= 1, "bins must be >= 1");
  Binning b;
  b.proj = proj;
  b.bins = bins;
  const double q = excluded / (2.0 * proj.size());
  for (const auto& p : proj) {
    if (torus && p.kind == Projection::Kind::x) {
      b.lo.push_back(0.0);
      b.hi.push_back(1.0);
      continue;
    }
    std::vector<double> vals;
    for (const auto* e : ensembles)
      for (const auto& s : *e)
        if (s.alive) vals.push_back(p(s));
    require(!vals.empty(), "cannot fit a binning box to empty ensembles");
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    const auto at = [&](double f) {
      const std::size_t i = std::min(n - 1, static_cast<std::size_t>(std::floor(f * (n - 1))));
      return vals[i];
    };
    double lo = at(q), hi = at(1.0 - q);
    if (p.kind == Projection::Kind::speed || p.kind == Projection::Kind::radius) lo = std::min(lo, 0.0);
    if (!(hi > lo)) {
      const double w = std::max(1e-6, 1e-6 * std::abs(lo));
      lo -= w;
      hi += w;
    }
    b.lo.push_back(lo);
    b.hi.push_back(hi);
  }
  return b;
}

struct TvEstimate {
  double weighted = 0.0;  // sum phi(center) |p - q|; equals the L1 value for phi = 1
  double l1 = 0.0;        // unweighted sum |p - q|
  double tv = 0.0;        // l1 / 2
  double noise = 0.0;     // expected weighted value under identical laws
  double clipped_a = 0.0;
  double clipped_b = 0.0;
  bool warning = false;
  std::string note;
};

inline TvEstimate weighted_tv(const std::vector<PhaseState>& a, const std::vector<PhaseState>& b, const WeightFn& phi,
                              const Binning& binning) {
  require(!a.empty() && !b.empty(), "ensembles must be non-empty");
  const long nc = binning.n_cells();
  require(nc <= 50'000'000, "binning has too many cells");
  std::vector<double> pa(nc, 0.0), pb(nc, 0.0);
  const double Na = static_cast<double>(a.size()), Nb = static_cast<double>(b.size());
  long out_a = 0, out_b = 0;
  for (const auto& s : a) {
    const long c = s.alive ? binning.cell(s) : -1;
    if (c < 0) ++out_a; else pa[c] += 1.0;
  }
  for (const auto& s : b) {
    const long c = s.alive ? binning.cell(s) : -1;
    if (c < 0) ++out_b; else pb[c] += 1.0;
  }
  TvEstimate r;
  r.clipped_a = out_a / Na;
  r.clipped_b = out_b / Nb;
  const double worst = std::max(r.clipped_a, r.clipped_b);
  if (worst > 0.10) {
    std::ostringstream os;
    os << "binning box misses " << 100.0 * worst << "% of an ensemble (limit 10%)";
    throw error(os.str());
  }
  if (worst > 0.01) {
    r.warning = true;
    std::ostringstream os;
    os << "binning box misses " << 100.0 * worst << "% of an ensemble";
    r.note = os.str();
  }
  const int dim = a.front().dim;
  const double c0 = std::sqrt(2.0 / std::numbers::pi);
  const double inv = 1.0 / Na + 1.0 / Nb;
  for (long c = 0; c < nc; ++c) {
    const double p = pa[c] / Na, q = pb[c] / Nb;
    if (pa[c] == 0.0 && pb[c] == 0.0) continue;
    const double w = phi(binning.center(c, dim));
    const double diff = std::abs(p - q);
    r.l1 += diff;
    r.weighted += w * diff;
    const double pool = (pa[c] + pb[c]) / (Na + Nb);
    r.noise += w * c0 * std::sqrt(pool * (1.0 - pool) * inv);
  }
  r.tv = 0.5 * r.l1;
  return r;
}

// ---------------------------------------------------------------------------
// Decay fits

struct FitResult {
  enum class Kind { exponential, power, none };
  Kind kind = Kind::none;
  double rate_or_exponent = 0.0;  // lambda in exp(-lambda t) or p in (1+t)^(-p)
  double intercept = 0.0;
  double residual = 0.0;  // RMS of log residuals
  double half_width = 0.0;  // 95% Student-t half-width on the rate
  std::size_t first = 0, last = 0;  // window [first, last)
};

inline std::string fit_kind_name(FitResult::Kind k) {
  switch (k) {
    case FitResult::Kind::exponential: return "exponential";
    case FitResult::Kind::power: return "power";
    case FitResult::Kind::none: return "none";
  }
  return "?";
}

inline FitResult decay_fit(const std::vector<double>& t, const std::vector<double>& v, FitResult::Kind kind,
                           std::size_t first = 0, std::size_t last = std::numeric_limits<std::size_t>::max()) {
  require(t.size() == v.size(), "times and values differ in length");
  require(kind != FitResult::Kind::none, "fit kind must be exponential or power");
  last = std::min(last, t.size());
  require(last > first && last - first >= 5, "decay fit needs at least 5 points in the window");
  const std::size_t n = last - first;
  std::vector<double> X(n), Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double val = v[first + i];
    if (!(val > 0.0)) {
      std::ostringstream os;
      os << "non-positive value " << val << " at t = " << t[first + i] << " inside the fit window";
      throw invalid_input(os.str());
    }
    X[i] = kind == FitResult::Kind::exponential ? t[first + i] : std::log1p(t[first + i]);
    Y[i] = std::log(val);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += X[i], my += Y[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxx += (X[i] - mx) * (X[i] - mx), sxy += (X[i] - mx) * (Y[i] - my);
  require(sxx > 0.0, "fit window has no spread in time");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = Y[i] - (icpt + slope * X[i]);
    ss += e * e;
  }
  FitResult f;
  f.kind = kind;
  f.rate_or_exponent = -slope;
  f.intercept = icpt;
  f.residual = std::sqrt(ss / n);
  const double se = std::sqrt(ss / (n - 2) / sxx);
  f.half_width = stats::student_t_quantile(0.975, static_cast<double>(n - 2)) * se;
  f.first = first;
  f.last = last;
  return f;
}

struct DecayCurve {
  std::vector<double> times;
  std::vector<double> values;  // TV (half L1) for phi = 1, weighted L1 otherwise
  std::vector<double> noise;
  std::vector<double> clipped;
  std::string phi_tag;
  std::string convention;
  std::string reference;  // "equilibrium" or "long-run proxy at t = ..."
  std::optional<FitResult> fit;
  std::vector<std::string> warnings;
};

// Contiguous window starting at the first t >= t_min, stopping before values fall under noise_factor * noise.
inline std::pair<std::size_t, std::size_t> fit_window(const DecayCurve& c, double t_min, double noise_factor = 3.0) {
  std::size_t first = 0;
  while (first < c.times.size() && c.times[first] < t_min) ++first;
  std::size_t last = first;
  while (last < c.times.size() && c.values[last] >= noise_factor * c.noise[last] && c.values[last] > 0.0) ++last;
  return {first, last};
}

// ---------------------------------------------------------------------------
// Comparison with a theoretical envelope

struct ComparisonReport {
  enum class Verdict { dominates, violated, refused };
  Verdict verdict = Verdict::refused;
  std::vector<double> times, bound, measured, ratio;  // ratio = measured / bound
  std::string message;
};

inline std::string verdict_name(ComparisonReport::Verdict v) {
  switch (v) {
    case ComparisonReport::Verdict::dominates: return "DOMINATES";
    case ComparisonReport::Verdict::violated: return "VIOLATED";
    case ComparisonReport::Verdict::refused: return "REFUSED";
  }
  return "?";
}

inline ComparisonReport compare_to_theory(const DecayCurve& curve, const RateBound& bound,
                                          const DriftReport* drift = nullptr, double noise_factor = 3.0) {
  ComparisonReport r;
  if (drift && !drift->pass) {
    r.verdict = ComparisonReport::Verdict::refused;
    r.message = "no certified constants: the drift report did not pass";
    return r;
  }
  require(curve.fit.has_value(), "curve has no fit");
  require(!curve.values.empty(), "curve is empty");
  const double d0 = curve.values.front();
  bool ok = true;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    if (curve.values[i] < noise_factor * curve.noise[i]) continue;
    const double b = bound(curve.times[i]) * d0;
    r.times.push_back(curve.times[i]);
    r.bound.push_back(b);
    r.measured.push_back(curve.values[i]);
    r.ratio.push_back(b > 0.0 ? curve.values[i] / b : std::numeric_limits<double>::infinity());
    if (curve.values[i] > b) ok = false;
  }
  r.verdict = ok ? ComparisonReport::Verdict::dominates : ComparisonReport::Verdict::violated;
  r.message = ok ? "bound lies above every measurement past the noise floor"
                 : "measurement exceeds the bound at some time past the noise floor";
  return r;
}

// ---------------------------------------------------------------------------
// TV-decay pipeline

struct TvDecayOptions {
  long N = 100000;
  std::vector<double> t_grid;
  std::vector<Projection> projections;  // empty: all phase coordinates
  int bins = 32;
  FitResult::Kind fit_kind = FitResult::Kind::exponential;
  double fit_tmin = 0.0;
  double noise_factor = 3.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

inline std::uint64_t reference_seed(std::uint64_t seed) { return seed ^ 0xA5A5A5A5DEADBEEFULL; }

inline DecayCurve tv_decay(const ModelSpec& model, const InitSpec& init, const WeightFn& phi, const TvDecayOptions& opt) {
  require(opt.t_grid.size() >= 2, "t_grid needs at least two times");
  const int d = model_dim(model);
  const auto proj = opt.projections.empty() ? phase_projections(d) : opt.projections;
  DecayCurve curve;
  curve.phi_tag = phi.tag;
  curve.convention = phi.constant ? "tv = l1/2" : "weighted l1 = sum phi |p - q|";

  std::vector<PhaseState> ref;
  if (has_explicit_equilibrium(model)) {
    curve.reference = "equilibrium";
    for_each_snapshot(model, EquilibriumInit{}, opt.N, {0.0}, reference_seed(opt.seed), opt.threads,
                      [&](const EnsembleSnapshot& s) { ref = s.states; });
  } else {
    const double t_ref = 4.0 * opt.t_grid.back();
    std::ostringstream os;
    os << "long-run proxy at t = " << t_ref;
    curve.reference = os.str();
    for_each_snapshot(model, init, opt.N, {0.0, t_ref}, reference_seed(opt.seed), opt.threads,
                      [&](const EnsembleSnapshot& s) {
                        if (s.t > 0.0) ref = s.states;
                      });
  }
  const bool tor = toroidal(model);
  for_each_snapshot(model, init, opt.N, opt.t_grid, opt.seed, opt.threads, [&](const EnsembleSnapshot& s) {
    const Binning b = auto_binning({&s.states, &ref}, proj, opt.bins, tor);
    const TvEstimate e = weighted_tv(s.states, ref, phi, b);
    const double scale = phi.constant ? 0.5 : 1.0;
    curve.times.push_back(s.t);
    curve.values.push_back(scale * e.weighted);
    curve.noise.push_back(scale * e.noise);
    curve.clipped.push_back(std::max(e.clipped_a, e.clipped_b));
    if (e.warning) curve.warnings.push_back("t = " + std::to_string(s.t) + ": " + e.note);
  });
  const auto [first, last] = fit_window(curve, opt.fit_tmin, opt.noise_factor);
  if (last > first && last - first >= 5) curve.fit = decay_fit(curve.times, curve.values, opt.fit_kind, first, last);
  else
    curve.warnings.push_back("fewer than 5 points above the noise floor; no fit");
  return curve;
}

}  // namespace hk
