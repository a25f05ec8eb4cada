#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "generator.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "weights.hpp"

namespace hk {

// ---------------------------------------------------------------------------
// Foster-Lyapunov drift

struct DriftOptions {
  std::optional<double> zeta_target;
  std::optional<double> D_target;
  enum class Sampler { grid, random } sampler = Sampler::grid;
  long n = 40000;            // grid or random points inside the sub-level box
  long n_far = 10000;        // far-field points
  double phi_level = 1e3;    // box fitted to {phi <= phi_level}
  double far_factor = 4.0;   // far field reaches far_factor times the box
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct DriftReport {
  bool pass = false;
  bool degenerate = false;
  double zeta_hat = 0.0;
  double D_hat = 0.0;
  std::optional<double> D_target;
  double margin = 0.0;
  PhaseState worst_point;
  int worst_shell = 0;  // 0 inside the box, 1..8 far-field log shells
  long n_samples = 0;
  std::vector<double> box_halfwidth;  // per phase coordinate; 0 for bounded coordinates
  std::string sampling;
  std::string message;
};

namespace detail {

enum class CoordKind { free, torus, ball, box };

struct CoordSpec {
  CoordKind kind = CoordKind::free;
  double lo = 0.0, hi = 0.0;  // torus/box range
};

inline std::vector<CoordSpec> phase_coords(const ModelSpec& model) {
  const int d = model_dim(model);
  std::vector<CoordSpec> c(2 * d);
  const bool tor = toroidal(model);
  for (int i = 0; i < d; ++i)
    if (tor) c[i] = {CoordKind::torus, 0.0, 1.0};
  if (auto p = std::get_if<RunTumble>(&model))
    for (int i = 0; i < d; ++i) c[d + i] = {CoordKind::ball, -p->R0, p->R0};
  if (auto p = std::get_if<DegenerateBoltzmann>(&model))
    if (p->scatter == DegenerateBoltzmann::Scatter::uniform)
      for (int i = 0; i < d; ++i) c[d + i] = {CoordKind::box, -p->v_max, p->v_max};
  if (auto p = std::get_if<KnudsenGas>(&model)) {
    const Geometry& g = p->geometry;
    for (int i = 0; i < d; ++i) {
      if (g.kind == Geometry::Kind::disk)
        c[i] = {CoordKind::box, -g.radius, g.radius};
      else
        c[i] = {CoordKind::box, g.lo[i], g.hi[i]};
    }
  }
  return c;
}

inline bool admissible(const ModelSpec& model, const PhaseState& z) {
  if (auto p = std::get_if<RunTumble>(&model)) return norm(z.v, z.dim) <= p->R0;
  if (auto p = std::get_if<KnudsenGas>(&model)) return p->geometry.contains(z.x);
  return true;
}

// Largest c <= cap with phi(+-c e_i) <= level.
inline double bracket_axis(const WeightFn& phi, int dim, int coord, double level, double cap) {
  auto ok = [&](double c) {
    PhaseState p;
    p.dim = dim;
    PhaseState m = p;
    p.coord(coord) = c;
    m.coord(coord) = -c;
    const double a = phi(p), b = phi(m);
    return std::isfinite(a) && std::isfinite(b) && a <= level && b <= level;
  };
  double lo = 0.0, hi = 1.0;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) return cap;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return std::max(lo, 1e-6);
}

}  // namespace detail

inline DriftReport drift_verify(const ModelSpec& model, const WeightFn& phi, const DriftOptions& opt = {}) {
  validate(model);
  const int d = model_dim(model);
  const int k = 2 * d;
  DriftReport rep;
  rep.D_target = opt.D_target;

  if (phi.constant) {
    rep.degenerate = true;
    rep.zeta_hat = opt.zeta_target.value_or(1.0);
    rep.D_hat = rep.zeta_hat * phi(make_state(d, {}, {}));
    rep.margin = opt.D_target ? *opt.D_target - rep.D_hat : 0.0;
    rep.pass = rep.margin >= -opt.tolerance;
    rep.message = "degenerate weight: constant phi gives L*phi = 0 and D = zeta phi for any zeta";
    rep.sampling = "none";
    return rep;
  }

  const auto coords = detail::phase_coords(model);
  std::vector<double> half(k, 0.0);
  std::vector<int> free_idx;
  for (int i = 0; i < k; ++i)
    if (coords[i].kind == detail::CoordKind::free) {
      half[i] = detail::bracket_axis(phi, d, i, opt.phi_level, 1e4);
      free_idx.push_back(i);
    }
  rep.box_halfwidth = half;

  // Sample points: inside box, then far field.
  std::vector<PhaseState> pts;
  std::vector<int> shell;
  RngStream rng(opt.seed, 0);
  auto bounded_draw = [&](PhaseState& z, int i, double u) {
    const auto& c = coords[i];
    if (c.kind == detail::CoordKind::free) return;
    double val = c.lo + (c.hi - c.lo) * u;
    if (c.kind == detail::CoordKind::torus) val = wrap01(val);
    z.coord(i) = val;
  };
  if (opt.sampler == DriftOptions::Sampler::grid) {
    const int per = std::max(2, static_cast<int>(std::floor(std::pow(static_cast<double>(opt.n), 1.0 / k) + 1e-9)));
    long total = 1;
    for (int i = 0; i < k; ++i) total *= per;
    for (long idx = 0; idx < total; ++idx) {
      PhaseState z;
      z.dim = d;
      long rem = idx;
      for (int i = 0; i < k; ++i) {
        const int j = static_cast<int>(rem % per);
        rem /= per;
        const double u = static_cast<double>(j) / (per - 1);
        if (coords[i].kind == detail::CoordKind::free)
          z.coord(i) = -half[i] + 2.0 * half[i] * u;
        else if (coords[i].kind == detail::CoordKind::torus)
          z.coord(i) = static_cast<double>(j) / per;
        else
          bounded_draw(z, i, u);
      }
      if (detail::admissible(model, z)) {
        pts.push_back(z);
        shell.push_back(0);
      }
    }
    std::ostringstream os;
    os << "tensor grid " << per << "^" << k << " on {phi <= " << opt.phi_level << "} box";
    rep.sampling = os.str();
  } else {
    for (long n = 0; n < opt.n; ++n) {
      PhaseState z;
      z.dim = d;
      for (int i = 0; i < k; ++i) {
        const double u = rng.uniform();
        if (coords[i].kind == detail::CoordKind::free)
          z.coord(i) = -half[i] + 2.0 * half[i] * u;
        else
          bounded_draw(z, i, u);
      }
      if (!detail::admissible(model, z)) {
        --n;
        continue;
      }
      pts.push_back(z);
      shell.push_back(0);
    }
    std::ostringstream os;
    os << opt.n << " uniform points on {phi <= " << opt.phi_level << "} box";
    rep.sampling = os.str();
  }
  const int n_shells = 8;
  if (!free_idx.empty()) {
    const double lf = std::log(opt.far_factor);
    for (long n = 0; n < opt.n_far; ++n) {
      PhaseState z;
      z.dim = d;
      double s2 = 0.0;
      std::vector<double> g(free_idx.size());
      for (auto& x : g) x = rng.normal(), s2 += x * x;
      const double f = std::exp(lf * rng.uniform());
      for (std::size_t j = 0; j < free_idx.size(); ++j)
        z.coord(free_idx[j]) = f * half[free_idx[j]] * g[j] / std::sqrt(s2);
      for (int i = 0; i < k; ++i)
        if (coords[i].kind != detail::CoordKind::free) bounded_draw(z, i, rng.uniform());
      if (!detail::admissible(model, z)) {
        --n;
        continue;
      }
      pts.push_back(z);
      shell.push_back(1 + std::min(n_shells - 1, static_cast<int>(std::floor(n_shells * std::log(f) / lf))));
    }
    std::ostringstream os;
    os << " + " << opt.n_far << " far-field points, radius factor log-uniform in [1, " << opt.far_factor << "]";
    rep.sampling += os.str();
  }

  const std::size_t N = pts.size();
  std::vector<double> g(N), ph(N);
  parallel_for(N, opt.threads, [&](std::size_t i) {
    ph[i] = phi(pts[i]);
    g[i] = generator_apply(model, phi, pts[i]);
  });
  for (std::size_t i = 0; i < N; ++i)
    if (!(ph[i] >= 1.0 - 1e-12)) {
      std::ostringstream os;
      os << "invalid weight: phi = " << ph[i] << " < 1 at a sampled point (x1 = " << pts[i].x[0]
         << ", v1 = " << pts[i].v[0] << ")";
      throw invalid_input(os.str());
    }
  rep.n_samples = static_cast<long>(N);

  auto sup_at = [&](double zeta, std::size_t* arg) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < N; ++i) {
      const double val = g[i] + zeta * ph[i];
      if (val > best) best = val, *arg = i;
    }
    return best;
  };

  std::size_t arg = 0;
  if (opt.zeta_target) {
    require(*opt.zeta_target > 0.0, "zeta_target must be > 0");
    rep.zeta_hat = *opt.zeta_target;
    const double s = sup_at(rep.zeta_hat, &arg);
    rep.D_hat = std::max(0.0, s);
    rep.margin = opt.D_target ? *opt.D_target - s : rep.D_hat - s;
  } else {
    // Largest admissible zeta from the outermost shell, then minimise D(zeta)/zeta.
    double zcap = std::numeric_limits<double>::infinity();
    bool have_outer = false;
    for (std::size_t i = 0; i < N; ++i)
      if (shell[i] == n_shells) zcap = std::min(zcap, -g[i] / ph[i]), have_outer = true;
    if (!have_outer) {
      zcap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < N; ++i) zcap = std::min(zcap, (1.0 - g[i]) / ph[i]);
    }
    if (!(zcap > 0.0)) {
      rep.pass = false;
      rep.message = "no zeta > 0 is compatible with the far field (L*phi/phi >= 0 there)";
      rep.worst_point = pts[0];
      return rep;
    }
    const double hi_cap = std::isfinite(zcap) ? zcap : 1e3;
    auto cost = [&](double lz) {
      std::size_t a = 0;
      const double z = std::exp(lz);
      return std::max(0.0, sup_at(z, &a)) / z;
    };
    double a = std::log(hi_cap) - std::log(1e6), b = std::log(hi_cap);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), e = a + gr * (b - a);
    double fc = cost(c), fe = cost(e);
    for (int it = 0; it < 100; ++it) {
      if (fc < fe) {
        b = e, e = c, fe = fc;
        c = b - gr * (b - a), fc = cost(c);
      } else {
        a = c, c = e, fc = fe;
        e = a + gr * (b - a), fe = cost(e);
      }
    }
    rep.zeta_hat = std::exp(0.5 * (a + b));
    const double s = sup_at(rep.zeta_hat, &arg);
    rep.D_hat = std::max(0.0, s);
    if (opt.D_target) {
      rep.margin = *opt.D_target - s;
    } else {
      rep.margin = rep.D_hat - s;
    }
  }
  rep.worst_point = pts[arg];
  rep.worst_shell = shell[arg];
  const bool outer = rep.worst_shell == n_shells;
  rep.pass = rep.margin >= -opt.tolerance && !outer && rep.zeta_hat > 0.0;
  std::ostringstream os;
  if (outer) os << "binding point lies in the outermost far-field shell: supremum not certified; ";
  os << (rep.pass ? "PASS" : "FAIL") << " zeta = " << rep.zeta_hat << ", D = " << rep.D_hat << ", margin = " << rep.margin;
  rep.message = os.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Minorisation

struct PhaseBox {
  std::vector<double> lo, hi;  // per phase coordinate (x1..xd, v1..vd)

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

struct MinorisationOptions {
  double tau = 1.0;
  PhaseBox eta_box;
  PhaseBox init_box;                       // initial points spread over this box (Halton)
  std::vector<PhaseState> initial_points;  // used instead of init_box when non-empty
  const WeightFn* phi = nullptr;           // small set {phi <= R} filter when set
  double R = std::numeric_limits<double>::infinity();
  int bins = 16;  // per phase coordinate
  long n_paths = 100000;
  int n_init = 8;
  double confidence = 0.99;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct MinorisationReport {
  double alpha_hat = 0.0;
  double alpha_raw = 0.0;  // before the confidence deduction
  double tau = 0.0;
  std::vector<double> alpha_per_init;
  std::vector<PhaseState> initial_points;
  PhaseBox eta_box;
  int bins_per_coord = 0;
  long n_bins = 0;
  long n_paths = 0;
  long empty_bins = 0;
  std::vector<long> empty_bin_examples;
  std::string small_set;
  std::string diagnostic;
};

inline double halton(long i, int base) {
  double f = 1.0, r = 0.0;
  for (long n = i; n > 0; n /= base) {
    f /= base;
    r += f * (n % base);
  }
  return r;
}

inline MinorisationReport minorisation_estimate(const ModelSpec& model, const MinorisationOptions& opt) {
  validate(model);
  require(opt.tau > 0.0, "tau must be > 0");
  require(opt.bins >= 1, "bins must be >= 1");
  require(opt.n_paths > 0, "n_paths must be > 0");
  const int d = model_dim(model);
  const int k = 2 * d;
  require(static_cast<int>(opt.eta_box.lo.size()) == k && static_cast<int>(opt.eta_box.hi.size()) == k,
          "eta box must give bounds for every phase coordinate");
  for (int i = 0; i < k; ++i) require(opt.eta_box.hi[i] > opt.eta_box.lo[i], "eta box must have hi > lo");

  MinorisationReport rep;
  rep.tau = opt.tau;
  rep.eta_box = opt.eta_box;
  rep.bins_per_coord = opt.bins;
  rep.n_paths = opt.n_paths;
  long nb = 1;
  for (int i = 0; i < k; ++i) nb *= opt.bins;
  rep.n_bins = nb;

  std::vector<PhaseState> init = opt.initial_points;
  if (init.empty()) {
    require(static_cast<int>(opt.init_box.lo.size()) == k, "initial box must give bounds for every phase coordinate");
    static constexpr int primes[6] = {2, 3, 5, 7, 11, 13};
    for (long h = 1; static_cast<int>(init.size()) < opt.n_init && h < 1000000; ++h) {
      PhaseState z;
      z.dim = d;
      for (int i = 0; i < k; ++i)
        z.coord(i) = opt.init_box.lo[i] + (opt.init_box.hi[i] - opt.init_box.lo[i]) * halton(h, primes[i]);
      if (toroidal(model)) wrap_torus(z);
      if (!detail::admissible(model, z)) continue;
      if (opt.phi && !((*opt.phi)(z) <= opt.R)) continue;
      init.push_back(z);
    }
    require(!init.empty(), "small set is empty on the initial box");
    std::ostringstream os;
    os << init.size() << " Halton points in the initial box";
    if (opt.phi) os << " with " << opt.phi->tag << " <= " << opt.R;
    rep.small_set = os.str();
  } else {
    rep.small_set = std::to_string(init.size()) + " caller-supplied initial points";
  }
  rep.initial_points = init;

  const double conf = opt.confidence;
  double alpha_hat = 1.0, alpha_raw = 1.0;
  std::vector<long> counts(nb);
  std::vector<long> bin_of(opt.n_paths);
  for (std::size_t j = 0; j < init.size(); ++j) {
    const PhaseState z0 = init[j];
    parallel_for(static_cast<std::size_t>(opt.n_paths), opt.threads, [&](std::size_t p) {
      RngStream rng(opt.seed, j * static_cast<std::uint64_t>(opt.n_paths) + p);
      PhaseState s = z0;
      advance(model, s, opt.tau, rng);
      long b = 0, mul = 1;
      bool inside = s.alive;
      for (int i = 0; i < k && inside; ++i) {
        const double u = (s.coord(i) - opt.eta_box.lo[i]) / (opt.eta_box.hi[i] - opt.eta_box.lo[i]);
        if (!(u >= 0.0 && u < 1.0)) {
          inside = false;
          break;
        }
        b += mul * std::min(opt.bins - 1, static_cast<int>(u * opt.bins));
        mul *= opt.bins;
      }
      bin_of[p] = inside ? b : -1;
    });
    std::fill(counts.begin(), counts.end(), 0);
    for (long b : bin_of)
      if (b >= 0) ++counts[b];
    long cmin = std::numeric_limits<long>::max();
    for (long b = 0; b < nb; ++b) {
      cmin = std::min(cmin, counts[b]);
      if (counts[b] == 0) {
        ++rep.empty_bins;
        if (rep.empty_bin_examples.size() < 10) rep.empty_bin_examples.push_back(b);
      }
    }
    const double raw = static_cast<double>(nb) * cmin / opt.n_paths;
    const double lower = static_cast<double>(nb) * stats::clopper_pearson_lower(cmin, opt.n_paths, conf);
    rep.alpha_per_init.push_back(lower);
    alpha_raw = std::min(alpha_raw, raw);
    alpha_hat = std::min(alpha_hat, lower);
  }
  rep.alpha_raw = std::min(alpha_raw, 1.0);
  rep.alpha_hat = std::min(alpha_hat, std::nextafter(1.0, 0.0));
  if (rep.empty_bins > 0) {
    rep.alpha_hat = 0.0;
    std::ostringstream os;
    os << rep.empty_bins << " empty (initial point, bin) cells force alpha_hat = 0; example bin indices:";
    for (long b : rep.empty_bin_examples) os << ' ' << b;
    rep.diagnostic = os.str();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Geometric control condition

struct GccReport {
  double kappa_hat = 0.0;
  double T = 0.0;
  bool with_potential = false;
  PhaseState argmin;
  int x_grid = 0;
  std::size_t n_velocities = 0;
  int n_steps = 0;
  std::string grid;
};

// Integral of sigma along the characteristic from (x, v) over [0, T].
inline double gcc_path_integral(const std::function<double(const Vec&)>& sigma, const Potential& pot, int d,
                                const Vec& x0, const Vec& v0, double T, int n_steps) {
  require(n_steps >= 2 && n_steps % 2 == 0, "n_steps must be even and >= 2");
  const double h = T / n_steps;
  std::vector<double> y(n_steps + 1);
  auto wrapped = [d](Vec x) {
    for (int i = 0; i < d; ++i) x[i] = wrap01(x[i]);
    return x;
  };
  if (pot.family == Potential::Family::none) {
    for (int j = 0; j <= n_steps; ++j) y[j] = sigma(wrapped(axpy(j * h, v0, x0)));
    return quad::composite_simpson(y, h);
  }
  Vec x = x0, v = v0;
  y[0] = sigma(wrapped(x));
  for (int j = 1; j <= n_steps; ++j) {
    auto acc = [&](const Vec& p) { return scaled(-1.0, pot.grad(p, d)); };
    const Vec k1x = v, k1v = acc(x);
    const Vec k2x = axpy(0.5 * h, k1v, v), k2v = acc(axpy(0.5 * h, k1x, x));
    const Vec k3x = axpy(0.5 * h, k2v, v), k3v = acc(axpy(0.5 * h, k2x, x));
    const Vec k4x = axpy(h, k3v, v), k4v = acc(axpy(h, k3x, x));
    for (int i = 0; i < d; ++i) {
      x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
      v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    y[j] = sigma(wrapped(x));
  }
  return quad::composite_simpson(y, h);
}

// kappa_hat = min over x on a regular torus grid (x_grid^d points) and the given velocities.
inline GccReport gcc_check(const std::function<double(const Vec&)>& sigma, const Potential& pot, int d, double T,
                           int x_grid, const std::vector<Vec>& velocities, int n_steps = 1000, int threads = 1) {
  require(d >= 1 && d <= 3, "d must be 1, 2 or 3");
  require(T > 0.0, "T must be > 0");
  require(x_grid >= 1, "x_grid must be >= 1");
  require(!velocities.empty(), "velocity grid is empty");
  long nx = 1;
  for (int i = 0; i < d; ++i) nx *= x_grid;
  const std::size_t total = static_cast<std::size_t>(nx) * velocities.size();
  std::vector<double> vals(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    const std::size_t iv = idx % velocities.size();
    long ix = static_cast<long>(idx / velocities.size());
    Vec x{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) {
      x[i] = static_cast<double>(ix % x_grid) / x_grid;
      ix /= x_grid;
    }
    vals[idx] = gcc_path_integral(sigma, pot, d, x, velocities[iv], T, n_steps);
  });
  const auto it = std::min_element(vals.begin(), vals.end());
  const std::size_t best = static_cast<std::size_t>(it - vals.begin());
  GccReport rep;
  rep.kappa_hat = std::max(0.0, *it);
  rep.T = T;
  rep.with_potential = pot.family != Potential::Family::none;
  rep.x_grid = x_grid;
  rep.n_velocities = velocities.size();
  rep.n_steps = n_steps;
  long ix = static_cast<long>(best / velocities.size());
  Vec x{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    x[i] = static_cast<double>(ix % x_grid) / x_grid;
    ix /= x_grid;
  }
  rep.argmin = make_state(d, x, velocities[best % velocities.size()]);
  std::ostringstream os;
  os << x_grid << "^" << d << " positions x " << velocities.size() << " velocities, " << n_steps
     << (rep.with_potential ? " RK4 steps" : " Simpson intervals");
  rep.grid = os.str();
  return rep;
}

}  // namespace hk
