#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"
#include "phase.hpp"

namespace hk {

// Confining potential Phi(x).
//   none       Phi = 0
//   power      Phi = <x>^gamma / gamma
//   quadratic  Phi = k |x|^2 / 2
//   cosine     Phi = A sum_i (1 - cos 2 pi x_i), periodic on the unit torus
struct Potential {
  enum class Family { none, power, quadratic, cosine };

  Family family = Family::none;
  double gamma_exp = 2.0;
  double k = 1.0;
  double amplitude = 0.0;

  static Potential none() { return {}; }
  static Potential power(double gamma_exp) {
    require(gamma_exp > 0.0, "power potential exponent must be > 0");
    Potential p;
    p.family = Family::power;
    p.gamma_exp = gamma_exp;
    return p;
  }
  static Potential quadratic(double k = 1.0) {
    require(k > 0.0, "quadratic potential stiffness must be > 0");
    Potential p;
    p.family = Family::quadratic;
    p.k = k;
    return p;
  }
  static Potential cosine(double amplitude) {
    require(amplitude >= 0.0, "cosine potential amplitude must be >= 0");
    Potential p;
    p.family = Family::cosine;
    p.amplitude = amplitude;
    return p;
  }

  double value(const Vec& x, int d) const {
    switch (family) {
      case Family::none: return 0.0;
      case Family::power: return std::pow(japanese(x, d), gamma_exp) / gamma_exp;
      case Family::quadratic: return 0.5 * k * norm2(x, d);
      case Family::cosine: {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += 1.0 - std::cos(2.0 * std::numbers::pi * x[i]);
        return amplitude * s;
      }
    }
    return 0.0;
  }

  Vec grad(const Vec& x, int d) const {
    Vec g{0.0, 0.0, 0.0};
    switch (family) {
      case Family::none: break;
      case Family::power: {
        const double f = std::pow(japanese(x, d), gamma_exp - 2.0);
        for (int i = 0; i < d; ++i) g[i] = f * x[i];
        break;
      }
      case Family::quadratic:
        for (int i = 0; i < d; ++i) g[i] = k * x[i];
        break;
      case Family::cosine:
        for (int i = 0; i < d; ++i)
          g[i] = amplitude * 2.0 * std::numbers::pi * std::sin(2.0 * std::numbers::pi * x[i]);
        break;
    }
    return g;
  }

  double min_value() const {
    switch (family) {
      case Family::power: return 1.0 / gamma_exp;
      default: return 0.0;
    }
  }

  // Bound on the Hessian operator norm, infinite when unbounded.
  double hessian_bound() const {
    switch (family) {
      case Family::none: return 0.0;
      case Family::power: return gamma_exp <= 2.0 ? 1.0 : INFINITY;
      case Family::quadratic: return k;
      case Family::cosine: return amplitude * 4.0 * std::numbers::pi * std::numbers::pi;
    }
    return INFINITY;
  }

  bool periodic() const { return family == Family::none || family == Family::cosine; }

  std::string name() const {
    switch (family) {
      case Family::none: return "none";
      case Family::power: return "power";
      case Family::quadratic: return "quadratic";
      case Family::cosine: return "cosine";
    }
    return "?";
  }
};

}  // namespace hk
