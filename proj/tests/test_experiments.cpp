#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "harris_kinetics/experiments.hpp"
#include "harris_kinetics/stats.hpp"

using namespace hk;

namespace {

std::vector<PhaseState> gaussian_cloud(long n, std::uint64_t seed, double shift = 0.0) {
  std::vector<PhaseState> out;
  for (long i = 0; i < n; ++i) {
    RngStream rng(seed, i);
    out.push_back(make_state(1, {rng.normal() + shift, 0, 0}, {rng.normal(), 0, 0}));
  }
  return out;
}

std::vector<double> grid(double step, double tmax) {
  std::vector<double> t;
  for (int i = 0; i * step <= tmax + 1e-12; ++i) t.push_back(i * step);
  return t;
}

}  // namespace

TEST(Ensemble, Bookkeeping) {
  const ModelSpec m = LinearBGK{1, true, Potential::none()};
  const PhaseState z0 = make_state(1, {0.25, 0, 0}, {1.0, 0, 0});
  const auto snaps = simulate_ensemble(m, DiracInit{z0}, 500, {0.0, 0.5, 2.0}, 3);
  ASSERT_EQ(snaps.size(), 3u);
  for (const auto& s : snaps) {
    EXPECT_EQ(s.states.size(), 500u);
    EXPECT_EQ(s.master_seed, 3u);
    for (const auto& z : s.states) EXPECT_EQ(z.t, s.t);
  }
  for (const auto& z : snaps[0].states) {
    EXPECT_EQ(z.x, z0.x);
    EXPECT_EQ(z.v, z0.v);
  }
}

TEST(Ensemble, BitReproducible) {
  const ModelSpec m = RunTumble{};
  const PhaseState z0 = make_state(2, {1.0, 0.5, 0}, {0.1, 0.0, 0});
  const auto a = simulate_ensemble(m, DiracInit{z0}, 300, {0.0, 1.0, 3.0}, 11);
  const auto b = simulate_ensemble(m, DiracInit{z0}, 300, {0.0, 1.0, 3.0}, 11, 2);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].states, b[k].states);
}

TEST(Ensemble, InvalidRequests) {
  EXPECT_THROW(simulate_ensemble(FitzHughNagumo{}, EquilibriumInit{}, 10, {0.0, 1.0}, 1), invalid_input);
  EXPECT_THROW(simulate_ensemble(LinearBGK{}, EquilibriumInit{}, 10, {0.5, 1.0}, 1), invalid_input);
  EXPECT_THROW(simulate_ensemble(LinearBGK{}, EquilibriumInit{}, 10, {0.0, 1.0, 1.0}, 1), invalid_input);
}

TEST(Ensemble, TorusBgkPositionsBecomeUniform) {
  const ModelSpec m = LinearBGK{1, true, Potential::none()};
  const long N = 100000;
  std::vector<long> counts(32, 0);
  for_each_snapshot(m, DiracInit{make_state(1, {0.1, 0, 0}, {0.0, 0, 0})}, N, {0.0, 20.0}, 5, 1,
                    [&](const EnsembleSnapshot& s) {
                      if (s.t == 0.0) return;
                      for (const auto& z : s.states) ++counts[std::min(31, static_cast<int>(z.x[0] * 32))];
                    });
  EXPECT_GT(stats::chi_square_uniform(counts).p_value, 0.01);
}

TEST(WeightedTv, IdenticalAndDisjoint) {
  const auto a = gaussian_cloud(1000, 1);
  const WeightFn one = weight_catalog(LinearBGK{}, "one");
  const Binning b = auto_binning({&a}, phase_projections(1), 16, false);
  EXPECT_EQ(weighted_tv(a, a, one, b).weighted, 0.0);

  std::vector<PhaseState> p(100, make_state(1, {-1.0, 0, 0}, {0, 0, 0}));
  std::vector<PhaseState> q(100, make_state(1, {1.0, 0, 0}, {0, 0, 0}));
  const Binning bd = auto_binning({&p, &q}, {{Projection::Kind::x, 0}}, 8, false, 0.0);
  const auto r = weighted_tv(p, q, one, bd);
  EXPECT_DOUBLE_EQ(r.l1, 2.0);
  EXPECT_DOUBLE_EQ(r.tv, 1.0);
  EXPECT_DOUBLE_EQ(r.weighted, 2.0);
}

TEST(WeightedTv, SamplingNoiseMatchesMultinomialOracle) {
  const auto a = gaussian_cloud(100000, 21), b = gaussian_cloud(100000, 22);
  const WeightFn one = weight_catalog(LinearBGK{}, "one");
  const Binning bin = auto_binning({&a, &b}, phase_projections(1), 32, false);
  const auto r = weighted_tv(a, b, one, bin);
  EXPECT_LT(r.tv, 0.06);
  EXPECT_NEAR(r.l1, r.noise, 0.15 * r.noise);
  EXPECT_FALSE(r.warning);
}

TEST(WeightedTv, SymmetricTriangleAndBounded) {
  const WeightFn one = weight_catalog(LinearBGK{}, "one");
  const ModelSpec wm = LinearBGK{1, false, Potential::power(2.0)};
  const WeightFn phi = weight_catalog(wm, "bgk_r2");
  RngStream rng(30, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = gaussian_cloud(2000, 100 + trial, rng.normal());
    const auto b = gaussian_cloud(2000, 200 + trial, rng.normal());
    const auto c = gaussian_cloud(2000, 300 + trial, rng.normal());
    const Binning bin = auto_binning({&a, &b, &c}, phase_projections(1), 16, false, 0.0);
    for (const WeightFn* w : {&one, &phi}) {
      const double ab = weighted_tv(a, b, *w, bin).weighted, ba = weighted_tv(b, a, *w, bin).weighted;
      const double ac = weighted_tv(a, c, *w, bin).weighted, cb = weighted_tv(c, b, *w, bin).weighted;
      EXPECT_NEAR(ab, ba, 1e-12 * (1.0 + ab));
      EXPECT_LE(ab, ac + cb + 1e-12);
    }
    EXPECT_LE(weighted_tv(a, b, one, bin).l1, 2.0 + 1e-12);
  }
}

TEST(WeightedTv, ClippedMass) {
  const auto a = gaussian_cloud(10000, 41);
  const WeightFn one = weight_catalog(LinearBGK{}, "one");
  Binning b;
  b.proj = {{Projection::Kind::x, 0}};
  b.bins = 8;
  b.lo = {-2.2};
  b.hi = {2.2};
  EXPECT_TRUE(weighted_tv(a, a, one, b).warning);
  b.lo = {-1.0};
  b.hi = {1.0};
  EXPECT_THROW(weighted_tv(a, a, one, b), error);
}

TEST(DecayFit, NoiselessRoundTrips) {
  std::vector<double> t, e, p;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.5 * i);
    e.push_back(3.0 * std::exp(-0.7 * t.back()));
    p.push_back(std::pow(1.0 + t.back(), -2.0));
  }
  const auto fe = decay_fit(t, e, FitResult::Kind::exponential);
  EXPECT_NEAR(fe.rate_or_exponent, 0.7, 1e-12);
  EXPECT_NEAR(std::exp(fe.intercept), 3.0, 1e-11);
  EXPECT_LT(fe.residual, 1e-12);
  const auto fp = decay_fit(t, p, FitResult::Kind::power);
  EXPECT_NEAR(fp.rate_or_exponent, 2.0, 1e-12);
  EXPECT_LT(fp.residual, 1e-12);
  EXPECT_LT(fp.half_width, 1e-10);
  // The other family fits worse.
  EXPECT_GT(decay_fit(t, p, FitResult::Kind::exponential).residual, fp.residual);
}

TEST(DecayFit, Errors) {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6}, v{1, 0.5, 0.25, 0.12, 0.1, 0.05, 0.0};
  EXPECT_THROW(decay_fit(t, v, FitResult::Kind::exponential), invalid_input);
  EXPECT_NO_THROW(decay_fit(t, v, FitResult::Kind::exponential, 0, 6));
}

TEST(DecayFit, WindowTooShort) {
  const std::vector<double> t{0, 1, 2, 3}, v{1, 0.5, 0.25, 0.1};
  EXPECT_THROW(decay_fit(t, v, FitResult::Kind::exponential), invalid_input);
}

TEST(DecayFit, NoiseFloorWindow) {
  DecayCurve c;
  c.times = {0, 1, 2, 3, 4, 5, 6, 7};
  c.values = {1, 0.5, 0.25, 0.12, 0.06, 0.03, 0.01, 0.02};
  c.noise.assign(8, 0.004);
  const auto [first, last] = fit_window(c, 1.0);
  EXPECT_EQ(first, 1u);
  EXPECT_EQ(last, 6u);
}

TEST(Compare, Verdicts) {
  DecayCurve c;
  for (int i = 0; i <= 10; ++i) {
    c.times.push_back(i);
    c.values.push_back(0.8 * std::exp(-1.0 * i));
    c.noise.push_back(1e-6);
  }
  c.fit = decay_fit(c.times, c.values, FitResult::Kind::exponential);
  const auto dom = compare_to_theory(c, doeblin_rate({1.0 - std::exp(-0.5), 1.0}));
  EXPECT_EQ(dom.verdict, ComparisonReport::Verdict::dominates);
  EXPECT_EQ(dom.times.size(), 11u);
  RateBound tight = doeblin_rate({1.0 - std::exp(-2.0), 1.0});
  EXPECT_EQ(compare_to_theory(c, tight).verdict, ComparisonReport::Verdict::violated);
  DriftReport failed;
  failed.pass = false;
  const auto ref = compare_to_theory(c, tight, &failed);
  EXPECT_EQ(ref.verdict, ComparisonReport::Verdict::refused);
  EXPECT_NE(ref.message.find("no certified constants"), std::string::npos);
}

TEST(TvDecay, TorusBgkDecaysGeometrically) {
  const ModelSpec m = LinearBGK{1, true, Potential::none()};
  TvDecayOptions o;
  o.N = 20000;
  o.t_grid = grid(0.5, 8.0);
  o.bins = 8;
  o.seed = 4;
  const auto c = tv_decay(m, DiracInit{make_state(1, {0.5, 0, 0}, {0.0, 0, 0})}, weight_catalog(m, "one"), o);
  ASSERT_TRUE(c.fit.has_value());
  EXPECT_GT(c.fit->rate_or_exponent, 0.0);
  EXPECT_EQ(c.reference, "equilibrium");
  EXPECT_GT(c.values.front(), 0.9);
  for (double v : c.values) EXPECT_LE(v, 1.0);
  for (double x : c.clipped) EXPECT_LT(x, 0.01);
}

TEST(TvDecay, ProxyReferenceWithoutExplicitEquilibrium) {
  const ModelSpec m = FitzHughNagumo{};
  TvDecayOptions o;
  o.N = 2000;
  o.t_grid = grid(0.25, 2.0);
  o.bins = 8;
  const auto c = tv_decay(m, DiracInit{make_state(1, {1.0, 0, 0}, {1.0, 0, 0})}, weight_catalog(m, "one"), o);
  EXPECT_NE(c.reference.find("proxy at t = 8"), std::string::npos);
  EXPECT_EQ(c.times.size(), 9u);
}
