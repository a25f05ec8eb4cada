#pragma once

#include <cmath>
#include <random>
#include <string>

#include "error.hpp"
#include "models.hpp"
#include "phase.hpp"
#include "potential.hpp"
#include "rng.hpp"

namespace hk {

struct SamplerStats {
  long attempts = 0;
  long accepted = 0;
  double acceptance() const { return attempts ? static_cast<double>(accepted) / attempts : 0.0; }
};

namespace detail {

// Draw from density proportional to exp(-<y>^g / g) on R^d.
// Proposal exp(-|y|^g / g): radius (g * Gamma(d/g))^(1/g), uniform direction; accept exp(-(<y>^g - |y|^g)/g).
inline Vec sample_power_law(double g, int d, RngStream& rng, SamplerStats* st) {
  std::gamma_distribution<double> G(d / g, 1.0);
  while (true) {
    const double r = std::pow(g * G(rng), 1.0 / g);
    const Vec y = scaled(r, sample_sphere(d, rng));
    const double jy = std::sqrt(1.0 + r * r);
    if (st) ++st->attempts;
    if (rng.uniform() < std::exp(-(std::pow(jy, g) - std::pow(r, g)) / g)) {
      if (st) ++st->accepted;
      return y;
    }
  }
}

// Positions distributed as exp(-Phi), on the unit torus when the potential is periodic.
inline Vec sample_positions(const Potential& pot, int d, bool torus, RngStream& rng, SamplerStats* st) {
  switch (pot.family) {
    case Potential::Family::quadratic: {
      if (st) ++st->attempts, ++st->accepted;
      return sample_gaussian(d, rng, 1.0 / std::sqrt(pot.k));
    }
    case Potential::Family::power: return sample_power_law(pot.gamma_exp, d, rng, st);
    case Potential::Family::none:
    case Potential::Family::cosine: {
      if (!torus) throw unsupported("no normalisable equilibrium for this potential on the whole space");
      while (true) {
        Vec x{0.0, 0.0, 0.0};
        for (int i = 0; i < d; ++i) x[i] = rng.uniform();
        if (st) ++st->attempts;
        if (pot.family == Potential::Family::none || rng.uniform() < std::exp(-pot.value(x, d))) {
          if (st) ++st->accepted;
          for (int i = 0; i < d; ++i) x[i] = wrap01(x[i]);
          return x;
        }
      }
    }
  }
  throw unsupported("potential family");
}

}  // namespace detail

inline bool has_explicit_equilibrium(const ModelSpec& m) {
  if (auto p = std::get_if<KnudsenGas>(&m))
    return p->uniform_temperature.has_value() && !std::holds_alternative<AbsorbingWall>(p->boundary);
  return std::holds_alternative<LinearBGK>(m) || std::holds_alternative<KineticFokkerPlanck>(m) ||
         std::holds_alternative<LinearBoltzmann>(m) || std::holds_alternative<DegenerateBoltzmann>(m);
}

// One exact draw from the stationary law.
inline PhaseState equilibrium_sampler(const ModelSpec& model, RngStream& rng, SamplerStats* stats = nullptr) {
  const int d = model_dim(model);
  PhaseState s;
  s.dim = d;
  if (auto p = std::get_if<LinearBGK>(&model)) {
    s.x = detail::sample_positions(p->potential, d, p->torus, rng, stats);
    s.v = sample_gaussian(d, rng);
  } else if (auto p = std::get_if<LinearBoltzmann>(&model)) {
    s.x = detail::sample_positions(p->potential, d, p->torus, rng, stats);
    s.v = sample_gaussian(d, rng);
  } else if (auto p = std::get_if<KineticFokkerPlanck>(&model)) {
    s.x = detail::sample_positions(p->potential, d, false, rng, stats);
    s.v = p->beta_friction == 2.0 ? sample_gaussian(d, rng) : detail::sample_power_law(p->beta_friction, d, rng, nullptr);
  } else if (auto p = std::get_if<DegenerateBoltzmann>(&model)) {
    s.x = detail::sample_positions(p->potential, d, true, rng, stats);
    s.v = detail::degenerate_scatter(*p, d, rng);
  } else if (auto p = std::get_if<KnudsenGas>(&model)) {
    if (!has_explicit_equilibrium(model))
      throw unsupported("Knudsen gas has an explicit equilibrium only for a conservative wall at constant temperature");
    s.x = p->geometry.sample_uniform(rng);
    s.v = sample_gaussian(d, rng, std::sqrt(*p->uniform_temperature));
    if (stats) ++stats->attempts, ++stats->accepted;
  } else {
    throw unsupported("model " + model_name(model) + " has no closed-form equilibrium");
  }
  return s;
}

}  // namespace hk
