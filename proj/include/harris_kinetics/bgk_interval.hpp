#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"

namespace hk {

// Discretisation of (0,1) x [-v_max, v_max]: Nx cells, Gauss-Legendre velocity nodes.
struct Grid1D {
  int Nx = 64;
  int Nv = 128;
  double v_max = 16.0;
  std::vector<double> x;  // cell centres
  std::vector<double> v;  // velocity nodes, symmetric about 0
  std::vector<double> w;  // quadrature weights

  static Grid1D make(int Nx, int Nv, double v_max) {
    require(Nx >= 16, "Nx must be >= 16");
    require(Nv >= 32 && Nv % 2 == 0, "Nv must be even and >= 32");
    require(v_max > 0.0, "v_max must be > 0");
    Grid1D g;
    g.Nx = Nx;
    g.Nv = Nv;
    g.v_max = v_max;
    for (int i = 0; i < Nx; ++i) g.x.push_back((i + 0.5) / Nx);
    const quad::Rule r = quad::gauss_legendre(Nv, -v_max, v_max);
    g.v = r.nodes;
    g.w = r.weights;
    for (int j = 0; j < Nv / 2; ++j) {  // enforce exact symmetry
      const double vv = 0.5 * (g.v[Nv - 1 - j] - g.v[j]);
      const double ww = 0.5 * (g.w[Nv - 1 - j] + g.w[j]);
      g.v[j] = -vv, g.v[Nv - 1 - j] = vv;
      g.w[j] = g.w[Nv - 1 - j] = ww;
    }
    return g;
  }

  // Default grid for wall temperatures up to T_max: v_max = 8 sqrt(T_max).
  static Grid1D for_temperatures(int Nx, int Nv, double T_max) { return make(Nx, Nv, 8.0 * std::sqrt(T_max)); }

  double dx() const { return 1.0 / Nx; }

  // Sum w M_T over the nodes; 1 up to truncation and quadrature error.
  double maxwellian_mass(double T) const {
    double s = 0.0;
    for (int j = 0; j < Nv; ++j) s += w[j] * std::exp(-v[j] * v[j] / (2.0 * T)) / std::sqrt(2.0 * std::numbers::pi * T);
    return s;
  }
};

struct SteadyStateReport {
  std::vector<double> x, rho, u, P, T;
  std::vector<double> f;  // row-major Nx x Nv
  double R0 = 0.0, R1 = 0.0;  // wall re-emission fluxes at x = 0 and x = 1
  double residual = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
  double flux_balance_0 = 0.0, flux_balance_1 = 0.0;  // |influx - outflux| per wall
  double regime_a = 0.0;  // kappa^2 T_min
  double regime_b = 0.0;  // (sqrt T_max - sqrt T_min) / (sqrt(kappa) T_max^(1/4))

  double f_at(int i, int j, int Nv) const { return f[static_cast<std::size_t>(i) * Nv + j]; }
};

namespace detail {

struct WallMaxwellians {
  std::vector<double> M0, M1;  // normalised so the emitted flux is 1
};

inline WallMaxwellians wall_maxwellians(const Grid1D& g, double T0, double T1) {
  WallMaxwellians m;
  m.M0.assign(g.Nv, 0.0);
  m.M1.assign(g.Nv, 0.0);
  double s0 = 0.0, s1 = 0.0;
  for (int j = 0; j < g.Nv; ++j) {
    m.M0[j] = std::exp(-g.v[j] * g.v[j] / (2.0 * T0)) / T0;
    m.M1[j] = std::exp(-g.v[j] * g.v[j] / (2.0 * T1)) / T1;
    if (g.v[j] > 0.0) s0 += g.w[j] * g.v[j] * m.M0[j];
    if (g.v[j] < 0.0) s1 += g.w[j] * -g.v[j] * m.M1[j];
  }
  for (int j = 0; j < g.Nv; ++j) {
    m.M0[j] /= s0;
    m.M1[j] /= s1;
  }
  return m;
}

// Cell source Q = rho M_T normalised by the discrete quadrature.
inline void local_maxwellian(const Grid1D& g, double rho, double T, double* out) {
  double s = 0.0;
  for (int j = 0; j < g.Nv; ++j) {
    out[j] = std::exp(-g.v[j] * g.v[j] / (2.0 * T));
    s += g.w[j] * out[j];
  }
  for (int j = 0; j < g.Nv; ++j) out[j] *= rho / s;
}

struct Sweep {
  std::vector<double> f;
  double out0 = 0.0, out1 = 0.0;  // outgoing fluxes at x = 0 and x = 1
};

// Step-characteristic transport sweep: exact cell update for a piecewise-constant source.
inline Sweep transport_sweep(const Grid1D& g, const std::vector<double>& Q, double kappa, const WallMaxwellians& wm,
                             double R0, double R1) {
  const int Nx = g.Nx, Nv = g.Nv;
  Sweep s;
  s.f.assign(static_cast<std::size_t>(Nx) * Nv, 0.0);
  for (int j = 0; j < Nv; ++j) {
    const double vj = g.v[j];
    const double D = g.dx() / (kappa * std::abs(vj));
    const double E = std::exp(-D);
    const double mE = -std::expm1(-D);
    if (vj > 0.0) {
      double fin = R0 * wm.M0[j];
      for (int i = 0; i < Nx; ++i) {
        const double q = Q[static_cast<std::size_t>(i) * Nv + j];
        const double fo = fin * E + q * mE;
        s.f[static_cast<std::size_t>(i) * Nv + j] = q + (fin - fo) / D;
        fin = fo;
      }
      s.out1 += g.w[j] * vj * fin;
    } else {
      double fin = R1 * wm.M1[j];
      for (int i = Nx - 1; i >= 0; --i) {
        const double q = Q[static_cast<std::size_t>(i) * Nv + j];
        const double fo = fin * E + q * mE;
        s.f[static_cast<std::size_t>(i) * Nv + j] = q + (fin - fo) / D;
        fin = fo;
      }
      s.out0 += g.w[j] * -vj * fin;
    }
  }
  return s;
}

inline void moments(const Grid1D& g, const std::vector<double>& f, std::vector<double>& rho, std::vector<double>& mom,
                    std::vector<double>& P) {
  rho.assign(g.Nx, 0.0);
  mom.assign(g.Nx, 0.0);
  P.assign(g.Nx, 0.0);
  for (int i = 0; i < g.Nx; ++i)
    for (int j = 0; j < g.Nv; ++j) {
      const double fw = g.w[j] * f[static_cast<std::size_t>(i) * g.Nv + j];
      rho[i] += fw;
      mom[i] += fw * g.v[j];
      P[i] += fw * g.v[j] * g.v[j];
    }
}

inline void check_inputs(double T0, double T1, double kappa, const Grid1D& g) {
  require(T0 > 0.0 && T1 > 0.0, "wall temperatures must be > 0");
  require(kappa > 0.0, "kappa must be > 0");
  require(g.Nx >= 16, "Nx must be >= 16");
  require(g.Nv >= 32 && g.Nv % 2 == 0, "Nv must be even and >= 32");
  require(g.v_max >= 6.0 * std::sqrt(std::max(T0, T1)) * (1.0 - 1e-12), "v_max must be >= 6 sqrt(T_max)");
}

// Source iteration with T either frozen (linear problem) or updated from f (nonlinear problem).
inline SteadyStateReport iterate(double T0, double T1, double kappa, const Grid1D& g, std::vector<double> T,
                                 bool freeze_T, double tol, int max_iter, double relax) {
  check_inputs(T0, T1, kappa, g);
  const int Nx = g.Nx, Nv = g.Nv;
  const auto wm = wall_maxwellians(g, T0, T1);
  std::vector<double> rho(Nx, 1.0), mom, P;
  std::vector<double> Q(static_cast<std::size_t>(Nx) * Nv), fprev;
  double R0 = 0.5, R1 = 0.5;
  SteadyStateReport rep;
  for (int it = 1; it <= max_iter; ++it) {
    for (int i = 0; i < Nx; ++i) local_maxwellian(g, rho[i], T[i], &Q[static_cast<std::size_t>(i) * Nv]);
    Sweep s = transport_sweep(g, Q, kappa, wm, R0, R1);
    moments(g, s.f, rho, mom, P);
    double mass = 0.0;
    for (int i = 0; i < Nx; ++i) mass += rho[i] * g.dx();
    for (auto& v : s.f) v /= mass;
    for (int i = 0; i < Nx; ++i) rho[i] /= mass, mom[i] /= mass, P[i] /= mass;
    s.out0 /= mass;
    s.out1 /= mass;
    if (!freeze_T)
      for (int i = 0; i < Nx; ++i) T[i] = P[i] / rho[i];
    double change = 0.0, fmax = 0.0;
    if (!fprev.empty())
      for (std::size_t k = 0; k < s.f.size(); ++k) {
        change = std::max(change, std::abs(s.f[k] - fprev[k]));
        fmax = std::max(fmax, std::abs(s.f[k]));
      }
    else
      change = std::numeric_limits<double>::infinity();
    const double res = fmax > 0.0 ? change / fmax : change;
    rep.residual_history.push_back(res);
    const double newR0 = (1.0 - relax) * R0 + relax * s.out0;
    const double newR1 = (1.0 - relax) * R1 + relax * s.out1;
    const double wall_change = std::max(std::abs(newR0 - R0), std::abs(newR1 - R1));
    R0 = newR0;
    R1 = newR1;
    fprev = std::move(s.f);
    rep.iterations = it;
    rep.residual = std::max(res, wall_change);
    if (rep.residual < tol) {
      rep.converged = true;
      rep.flux_balance_0 = std::abs(s.out0 - R0);
      rep.flux_balance_1 = std::abs(s.out1 - R1);
      break;
    }
    rep.flux_balance_0 = std::abs(s.out0 - R0);
    rep.flux_balance_1 = std::abs(s.out1 - R1);
  }
  rep.f = std::move(fprev);
  moments(g, rep.f, rep.rho, mom, rep.P);
  rep.x = g.x;
  rep.u.resize(Nx);
  rep.T.resize(Nx);
  for (int i = 0; i < Nx; ++i) {
    rep.u[i] = mom[i] / rep.rho[i];
    rep.T[i] = rep.P[i] / rep.rho[i];
  }
  rep.R0 = R0;
  rep.R1 = R1;
  const double Tmin = std::min(T0, T1), Tmax = std::max(T0, T1);
  rep.regime_a = kappa * kappa * Tmin;
  rep.regime_b = (std::sqrt(Tmax) - std::sqrt(Tmin)) / (std::sqrt(kappa) * std::pow(Tmax, 0.25));
  return rep;
}

}  // namespace detail

inline SteadyStateReport solve_steady(double T0, double T1, double kappa, const Grid1D& grid, double tol = 1e-10,
                                      int max_iter = 20000) {
  std::vector<double> T(grid.Nx);
  for (int i = 0; i < grid.Nx; ++i) T[i] = T0 + (T1 - T0) * grid.x[i];
  return detail::iterate(T0, T1, kappa, grid, T, false, tol, max_iter, 0.8);
}

// Temperature produced by the linear problem with the temperature profile frozen.
inline std::vector<double> fixed_point_temperature(const std::vector<double>& T_profile, double T0, double T1,
                                                   double kappa, const Grid1D& grid, double tol = 1e-12,
                                                   int max_iter = 20000) {
  require(static_cast<int>(T_profile.size()) == grid.Nx, "temperature profile must have Nx entries");
  const double lo = std::min(T0, T1), hi = std::max(T0, T1);
  for (double t : T_profile)
    require(t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12), "temperature profile must lie between the wall temperatures");
  SteadyStateReport r = detail::iterate(T0, T1, kappa, grid, T_profile, true, tol, max_iter, 0.8);
  if (!r.converged) {
    std::ostringstream os;
    os << "linear BGK solve did not converge in " << max_iter << " sweeps (residual " << r.residual << ")";
    throw not_converged(os.str(), r.residual);
  }
  return r.T;
}

}  // namespace hk
