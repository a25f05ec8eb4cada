#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "error.hpp"

namespace hk::stats {

// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic;
  double p_value;
};

// One-sample KS against a continuous CDF, with the Stephens small-sample correction.
inline KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  require(!x.empty(), "KS test needs data");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  const double sn = std::sqrt(n);
  return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "KS test needs data");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_q((ne + 0.12 + 0.11 / ne) * D)};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sided lower confidence bound on a binomial proportion.
inline double clopper_pearson_lower(long successes, long trials, double confidence) {
  require(trials > 0, "Clopper-Pearson needs trials > 0");
  if (successes <= 0) return 0.0;
  return boost::math::binomial_distribution<double>::find_lower_bound_on_p(
      static_cast<double>(trials), static_cast<double>(successes), 1.0 - confidence);
}

inline double student_t_quantile(double p, double dof) {
  return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

struct ChiSquareResult {
  double statistic;
  double p_value;
};

inline ChiSquareResult chi_square_uniform(const std::vector<long>& counts) {
  require(counts.size() >= 2, "chi-square needs at least two bins");
  double n = 0.0;
  for (long c : counts) n += c;
  const double e = n / counts.size();
  double s = 0.0;
  for (long c : counts) s += (c - e) * (c - e) / e;
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(counts.size() - 1));
  return {s, boost::math::cdf(boost::math::complement(dist, s))};
}

}  // namespace hk::stats
