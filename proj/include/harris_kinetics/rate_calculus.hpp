#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"

namespace hk {

struct DoeblinInput {
  double alpha;
  double tau;
};

struct HarrisInput {
  double gamma;
  double K;
  double alpha;
  double R;
  double tau;
  double alpha0;
  double gamma0;
};

struct DriftConstants {
  double zeta;
  double D;
  double tau;
};

struct DiscreteDrift {
  double gamma;
  double K;
  double K_loose;  // D / zeta
};

struct Provenance {
  std::string theorem;
  std::vector<std::pair<std::string, double>> inputs;
  bool paper_verbatim = false;
  std::string note;
};

struct RateBound {
  enum class Kind { geometric, subgeometric };

  Kind kind = Kind::geometric;
  double C = 1.0;
  double lambda = 0.0;
  std::function<double(double)> envelope;
  Provenance provenance;

  double operator()(double t) const {
    if (kind == Kind::geometric) return C * std::exp(-lambda * t);
    return envelope(t);
  }
};

// V : [1, inf) -> [1, inf), either 1 + s^xi or a monotone piecewise-linear table.
class ConcaveRateFn {
 public:
  enum class Kind { power, tabulated };

  static ConcaveRateFn power(double xi) {
    require(xi > 0.0 && xi < 1.0, "xi must lie in (0,1)");
    ConcaveRateFn f;
    f.kind_ = Kind::power;
    f.xi_ = xi;
    return f;
  }

  static ConcaveRateFn tabulated(std::vector<double> s, std::vector<double> v) {
    require(s.size() == v.size() && s.size() >= 2, "table needs at least two (s, V) pairs");
    require(s.front() == 1.0, "table must start at s = 1");
    require(v.front() >= 1.0, "V(1) must be >= 1");
    for (std::size_t i = 1; i < s.size(); ++i) {
      require(s[i] > s[i - 1], "table abscissae must be strictly increasing");
      require(v[i] > v[i - 1], "V must be strictly increasing");
    }
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      const double left = (v[i] - v[i - 1]) / (s[i] - s[i - 1]);
      const double right = (v[i + 1] - v[i]) / (s[i + 1] - s[i]);
      if (right - left > 1e-12) {
        std::ostringstream os;
        os << "V is not concave at s = " << s[i];
        throw invalid_input(os.str());
      }
    }
    ConcaveRateFn f;
    f.kind_ = Kind::tabulated;
    f.s_ = std::move(s);
    f.v_ = std::move(v);
    return f;
  }

  Kind kind() const { return kind_; }
  double xi() const { return xi_; }
  const std::vector<double>& table_s() const { return s_; }
  const std::vector<double>& table_v() const { return v_; }

  double operator()(double s) const {
    if (kind_ == Kind::power) return 1.0 + std::pow(s, xi_);
    const auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    if (i + 1 >= s_.size()) i = s_.size() - 2;
    const double slope = (v_[i + 1] - v_[i]) / (s_[i + 1] - s_[i]);
    return v_[i] + slope * (s - s_[i]);
  }

  // Panel boundaries after a: next dyadic point or table node.
  double next_break(double a) const {
    double b = std::exp2(std::floor(std::log2(a)) + 1.0);
    if (b <= a) b *= 2.0;
    if (kind_ == Kind::tabulated) {
      const auto it = std::upper_bound(s_.begin(), s_.end(), a);
      if (it != s_.end()) b = std::min(b, *it);
    }
    return b;
  }

 private:
  Kind kind_ = Kind::power;
  double xi_ = 0.5;
  std::vector<double> s_, v_;
};

inline RateBound doeblin_rate(const DoeblinInput& in) {
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw invalid_input("alpha must lie in (0,1)");
  if (!(in.tau > 0.0)) throw invalid_input("tau must be > 0");
  RateBound r;
  r.kind = RateBound::Kind::geometric;
  r.C = 1.0 / (1.0 - in.alpha);
  r.lambda = -std::log1p(-in.alpha) / in.tau;
  r.provenance = {"doeblin", {{"alpha", in.alpha}, {"tau", in.tau}}, false, ""};
  return r;
}

inline DiscreteDrift drift_to_discrete(const DriftConstants& in) {
  if (!(in.zeta > 0.0)) throw invalid_input("zeta must be > 0");
  if (!(in.tau > 0.0)) throw invalid_input("tau must be > 0");
  if (!(in.D >= 0.0)) throw invalid_input("D must be >= 0");
  DiscreteDrift out;
  out.gamma = std::exp(-in.zeta * in.tau);
  out.K = in.D / in.zeta * -std::expm1(-in.zeta * in.tau);
  out.K_loose = in.D / in.zeta;
  return out;
}

inline RateBound harris_rate(const HarrisInput& in) {
  if (!(in.gamma > 0.0 && in.gamma < 1.0)) throw invalid_input("gamma must lie in (0,1)");
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw invalid_input("alpha must lie in (0,1)");
  if (!(in.tau > 0.0)) throw invalid_input("tau must be > 0");
  if (!(in.K >= 0.0)) throw invalid_input("K must be >= 0");
  if (in.K == 0.0) {
    RateBound r = doeblin_rate({in.alpha, in.tau});
    r.provenance.note = "K = 0 delegates to doeblin";
    return r;
  }
  if (!(in.alpha0 > 0.0 && in.alpha0 < in.alpha)) throw invalid_input("alpha0 must lie in (0, alpha)");
  if (!(in.R > 2.0 * in.K / (1.0 - in.alpha))) throw invalid_input("R must exceed 2K/(1-alpha)");
  const double g0_min = in.gamma + 2.0 * in.K / in.R;
  if (!(in.gamma0 >= g0_min - 1e-12 && in.gamma0 < 1.0))
    throw invalid_input("gamma0 must lie in [gamma + 2K/R, 1)");

  const double beta = in.alpha0 / in.K;
  const double second = (2.0 + in.R * beta * (2.0 - in.gamma0)) / (2.0 + in.R * beta);
  const double alpha_bar = std::min(in.alpha + in.alpha0, second);
  if (alpha_bar >= 1.0) {
    std::ostringstream os;
    os << "alpha_bar = " << alpha_bar
       << " >= 1: log(1 - alpha_bar) undefined (formula applied verbatim; C := 1 - alpha_bar is a known "
          "inconsistency with C > 1)";
    throw constants_out_of_range(os.str());
  }
  RateBound r;
  r.kind = RateBound::Kind::geometric;
  r.C = 1.0 - alpha_bar;
  r.lambda = -std::log1p(-alpha_bar) / in.tau;
  r.provenance = {"harris",
                  {{"gamma", in.gamma}, {"K", in.K}, {"alpha", in.alpha}, {"R", in.R}, {"tau", in.tau},
                   {"alpha0", in.alpha0}, {"gamma0", in.gamma0}, {"beta", beta}, {"alpha_bar", alpha_bar}},
                  true,
                  "C = 1 - alpha_bar taken verbatim; not a norm-equivalence constant"};
  return r;
}

namespace detail {

inline constexpr double hv_panel_tol = 1e-11;

inline double hv_panel(const ConcaveRateFn& V, double a, double b) {
  return quad::adaptive_simpson([&](double s) { return 1.0 / V(s); }, a, b, hv_panel_tol);
}

}  // namespace detail

inline double hv(const ConcaveRateFn& V, double t) {
  if (!(t >= 1.0)) throw invalid_input("hv requires t >= 1");
  double acc = 0.0;
  double a = 1.0;
  while (a < t) {
    const double b = std::min(V.next_break(a), t);
    acc += detail::hv_panel(V, a, b);
    a = b;
  }
  return acc;
}

inline double hv_inverse(const ConcaveRateFn& V, double u) {
  if (!(u >= 0.0)) throw invalid_input("hv_inverse requires u >= 0");
  if (u == 0.0) return 1.0;
  double acc = 0.0;
  double a = 1.0;
  while (true) {
    const double b = V.next_break(a);
    if (!std::isfinite(b) || b > 1e300) return std::numeric_limits<double>::infinity();
    const double I = detail::hv_panel(V, a, b);
    if (acc + I >= u) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (acc + detail::hv_panel(V, a, mid) < u)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    acc += I;
    a = b;
  }
}

inline RateBound subgeometric_envelope(const ConcaveRateFn& V, double C, double mu_phi) {
  if (!(C > 0.0)) throw invalid_input("C must be > 0");
  if (!(mu_phi >= 1.0)) throw invalid_input("mu_phi must be >= 1");
  RateBound r;
  r.kind = RateBound::Kind::subgeometric;
  r.C = C;
  r.envelope = [V, C, mu_phi](double t) {
    const double u = std::max(t, 0.0);
    const double s = hv_inverse(V, u);
    if (!std::isfinite(s)) return 0.0;
    return C * mu_phi / s + C / V(s);
  };
  r.provenance = {"subgeometric harris", {{"C", C}, {"mu_phi", mu_phi}}, false, ""};
  if (V.kind() == ConcaveRateFn::Kind::power) r.provenance.inputs.emplace_back("xi", V.xi());
  return r;
}

inline RateBound degenerate_boltzmann_rate(double beta, double kappa, double tau, double sigma_inf) {
  if (!(beta > 0.0 && beta < 1.0)) throw invalid_input("beta must lie in (0,1)");
  if (!(kappa > 0.0)) throw invalid_input("kappa must be > 0");
  if (!(tau > 0.0)) throw invalid_input("tau must be > 0");
  if (!(sigma_inf >= 0.0)) throw invalid_input("sigma_inf must be >= 0");
  const double a = beta * kappa * kappa * std::exp(-tau * sigma_inf);
  if (!(a > 0.0 && a < 1.0)) throw invalid_input("effective alpha = beta kappa^2 exp(-tau sigma_inf) must lie in (0,1)");
  RateBound r;
  r.kind = RateBound::Kind::geometric;
  r.C = 1.0 / (1.0 - a);
  r.lambda = -std::log1p(-a) / tau;
  r.provenance = {"degenerate boltzmann",
                  {{"beta", beta}, {"kappa", kappa}, {"tau", tau}, {"sigma_inf", sigma_inf}, {"alpha_eff", a}},
                  false,
                  ""};
  return r;
}

}  // namespace hk
