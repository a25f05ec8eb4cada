#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "harris_kinetics/equilibrium.hpp"
#include "harris_kinetics/models.hpp"
#include "harris_kinetics/stats.hpp"

using namespace hk;

namespace {

double std_normal_cdf(double x) { return stats::normal_cdf(x); }

// E|v - Z|^gamma by adaptive integration (d = 1 split at the kink, d = 3 in polar form).
double lambda_oracle(double vn, double g, int d) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  if (d == 1) {
    auto f = [&](double w) { return std::pow(std::abs(vn - w), g) * c * std::exp(-0.5 * w * w); };
    return GK::integrate(f, -std::numeric_limits<double>::infinity(), vn, 15, 1e-13) +
           GK::integrate(f, vn, std::numeric_limits<double>::infinity(), 15, 1e-13);
  }
  auto radial = [&](double r) {
    auto ang = [&](double cth) { return 0.5 * std::pow(std::max(0.0, r * r + vn * vn - 2.0 * r * vn * cth), 0.5 * g); };
    const double inner = GK::integrate(ang, -1.0, 1.0, 15, 1e-13);
    return inner * r * r * std::exp(-0.5 * r * r) * std::sqrt(2.0 / std::numbers::pi);
  };
  return GK::integrate(radial, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12);
}

}  // namespace

TEST(FirstCollisionTime, Examples) {
  EXPECT_DOUBLE_EQ(first_collision_time({0.25, 0, 0}, {0.5, 0, 0}, Geometry::interval()), 1.5);
  const auto disk = Geometry::disk(1.0);
  for (double th : {0.0, 0.7, 2.0, 4.0}) EXPECT_NEAR(first_collision_time({0, 0, 0}, {std::cos(th), std::sin(th), 0}, disk), 1.0, 1e-14);
  const auto box = Geometry::box(2, {0, 0, 0}, {1, 1, 1});
  EXPECT_NEAR(first_collision_time({0.3, 0.7, 0}, {1, -2, 0}, box), 0.35, 1e-15);
}

TEST(FirstCollisionTime, EdgeCases) {
  const auto disk = Geometry::disk(1.0);
  EXPECT_TRUE(std::isinf(first_collision_time({0.2, 0.1, 0}, {0, 0, 0}, disk)));
  EXPECT_EQ(first_collision_time({1, 0, 0}, {1, 0.5, 0}, disk), 0.0);   // outgoing
  EXPECT_EQ(first_collision_time({1, 0, 0}, {0, 1, 0}, disk), 0.0);     // grazing
  EXPECT_GT(first_collision_time({1, 0, 0}, {-1, 0, 0}, disk), 1.9);    // incoming
  EXPECT_THROW(first_collision_time({2, 0, 0}, {1, 0, 0}, disk), invalid_input);
}

TEST(Boundary, SpecularIsAnInvolutionAndIsometry) {
  RngStream rng(5, 0);
  for (int i = 0; i < 1000; ++i) {
    const Vec n = sample_sphere(3, rng);
    const Vec u = sample_gaussian(3, rng);
    const Vec r = specular(u, n, 3);
    const Vec rr = specular(r, n, 3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(rr[k], u[k], 1e-14);
    EXPECT_NEAR(norm(r, 3), norm(u, 3), 1e-14);
  }
}

TEST(Boundary, MaxwellPureSpecular) {
  RngStream rng(1, 2);
  const Vec n{1, 0, 0}, u{0.7, -0.2, 0};
  const Vec v = sample_maxwell_boundary(u, n, n, 0.0, 1.0, 2, rng);
  const Vec r = specular(u, n, 2);
  EXPECT_EQ(v, r);
}

TEST(Boundary, DiffuseNormalComponentIsRayleigh) {
  RngStream rng(9, 0);
  const Vec n{0.6, 0.8, 0}, u{0.6, 0.8, 0};
  const long N = 100000;
  std::vector<double> s(N);
  double energy = 0.0;
  for (long i = 0; i < N; ++i) {
    const Vec v = sample_maxwell_boundary(u, n, n, 1.0, 1.0, 2, rng);
    EXPECT_LT(dot(v, n, 2), 0.0);
    s[i] = -dot(v, n, 2);
    energy += norm2(v, 2);
  }
  const auto ks = stats::ks_one_sample(s, [](double x) { return x <= 0 ? 0.0 : -std::expm1(-0.5 * x * x); });
  EXPECT_GT(ks.p_value, 0.01);
  // Var |v|^2 = 4 + 2.
  EXPECT_NEAR(energy / N, 3.0, 4.0 * std::sqrt(6.0 / N));
}

TEST(Boundary, ClWithUnitCoefficientsIsDiffuse) {
  const Vec n{0.0, 1.0, 0}, u{0.3, 1.1, 0};
  const long N = 100000;
  RngStream a(21, 0), b(21, 1);
  std::vector<double> an(N), at(N), bn(N), bt(N);
  for (long i = 0; i < N; ++i) {
    const Vec va = sample_cl_kernel(u, n, n, 1.0, 1.0, 1.0, 2, a);
    const Vec vb = sample_maxwell_boundary(u, n, n, 1.0, 1.0, 2, b);
    an[i] = va[1], at[i] = va[0], bn[i] = vb[1], bt[i] = vb[0];
  }
  EXPECT_GT(stats::ks_two_sample(an, bn).p_value, 0.01);
  EXPECT_GT(stats::ks_two_sample(at, bt).p_value, 0.01);
}

TEST(Boundary, ClTangentialLimit) {
  RngStream rng(4, 4);
  const Vec n{1, 0, 0}, u{0.5, 0.8, -0.3};
  const Vec v = sample_cl_kernel(u, n, n, 0.5, 1e-12, 1.0, 3, rng);
  EXPECT_NEAR(v[1], 0.8, 1e-5);
  EXPECT_NEAR(v[2], -0.3, 1e-5);
}

TEST(Boundary, ClKernelFluxNormalisation) {
  // Importance sampling from a diffuse flux law at temperature Tp.
  const double Tp = 1.5, rp = 0.5, rq = 0.7;
  const Vec n{1, 0, 0}, u{0.8, 0.5, 0};
  RngStream rng(13, 0);
  const long N = 100000;
  double sum = 0.0;
  for (long i = 0; i < N; ++i) {
    const Vec v = sample_diffuse(n, 2, Tp, rng);
    const double vn = -v[0];
    const double q = vn / Tp * std::exp(-vn * vn / (2 * Tp)) * std::exp(-v[1] * v[1] / (2 * Tp)) /
                     std::sqrt(2 * std::numbers::pi * Tp);
    const double w = cl_kernel_density(u, v, n, rp, rq, 1.0, 2) * vn / q;
    sum += w;
  }
  const double mean = sum / N;
  EXPECT_NEAR(mean, 1.0, 3.0 / std::sqrt(static_cast<double>(N)));
}

TEST(CollisionFrequency, ConstantCase) {
  EXPECT_EQ(collision_frequency({3.0, 1.0, 0}, 0.0, 2), 1.0);
}

TEST(CollisionFrequency, ClosedFormAgainstIntegration) {
  for (double g : {0.25, 0.5, 1.0})
    for (double vn : {0.0, 0.5, 2.0, 7.0, 20.0}) {
      EXPECT_NEAR(collision_frequency({vn, 0, 0}, g, 1), lambda_oracle(vn, g, 1), 1e-8) << g << " " << vn;
      EXPECT_NEAR(collision_frequency({0, vn, 0}, g, 3), lambda_oracle(vn, g, 3), 1e-8) << g << " " << vn;
    }
}

TEST(CollisionFrequency, MonteCarloOracleAtOrigin) {
  RngStream rng(77, 0);
  const long N = 1000000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < N; ++i) {
    const double r = norm(sample_gaussian(3, rng), 3);
    s += r, s2 += r * r;
  }
  const double mean = s / N, se = std::sqrt((s2 / N - mean * mean) / N);
  const double lam = collision_frequency({0, 0, 0}, 1.0, 3);
  EXPECT_NEAR(lam, 2.0 * std::sqrt(2.0 / std::numbers::pi), 1e-14);
  EXPECT_NEAR(lam, mean, 3.0 * se);
}

TEST(CollisionFrequency, Bounds) {
  for (double g : {0.3, 1.0})
    for (int i = 0; i <= 100; ++i) {
      const double vn = 0.1 * i;
      EXPECT_LE(collision_frequency({vn, 0, 0}, g, 1), std::pow(1.0 + vn * vn, 0.5 * g) + 1e-14);
      for (int d = 1; d <= 3; ++d)
        EXPECT_LE(collision_frequency({vn, 0, 0}, g, d), collision_frequency_bound({vn, 0, 0}, g, d) + 1e-14);
    }
  // The d-independent form fails for d > 1 at v = 0: E|Z| > 1 in R^3.
  EXPECT_GT(collision_frequency({0, 0, 0}, 1.0, 3), 1.0);
}

TEST(Step, BgkJumpRedrawsGaussianVelocity) {
  const ModelSpec m = LinearBGK{1, true, Potential::none()};
  const long N = 50000;
  std::vector<double> v(N);
  for (long i = 0; i < N; ++i) {
    RngStream rng(3, i);
    PhaseState s = make_state(1, {0.5, 0, 0}, {3.0, 0, 0});
    s = step(m, s, 40.0, rng);
    EXPECT_GE(s.x[0], 0.0);
    EXPECT_LT(s.x[0], 1.0);
    EXPECT_DOUBLE_EQ(s.t, 40.0);
    v[i] = s.v[0];
  }
  EXPECT_GT(stats::ks_one_sample(v, std_normal_cdf).p_value, 0.01);
}

TEST(Step, SpecularKnudsenPreservesSpeed) {
  MaxwellWall w;
  w.accommodation = [](const Vec&) { return 0.0; };
  const ModelSpec m = KnudsenGas::with_constant_temperature(Geometry::disk(1.0), w, 1.0);
  RngStream rng(8, 0);
  PhaseState s = make_state(2, {0.1, -0.2, 0}, {1.3, 0.4, 0});
  const double sp = norm(s.v, 2);
  for (int k = 0; k < 200; ++k) {
    s = step(m, s, 0.37, rng);
    EXPECT_NEAR(norm(s.v, 2), sp, 1e-12);
    EXPECT_LE(norm(s.x, 2), 1.0 + 1e-12);
  }
}

TEST(Step, KnudsenStaysInBoxWithInwardVelocityAfterBounce) {
  const ModelSpec m = KnudsenGas::with_constant_temperature(Geometry::box(2, {0, 0, 0}, {1, 1, 1}), DiffuseWall{}, 1.0);
  RngStream rng(8, 1);
  PhaseState s = make_state(2, {0.5, 0.5, 0}, {1.0, 0.3, 0});
  const auto& g = std::get<KnudsenGas>(m).geometry;
  for (int k = 0; k < 2000; ++k) {
    s = step(m, s, 0.05, rng);
    EXPECT_TRUE(g.contains(s.x));
  }
}

TEST(Step, AbsorbingWallKillsTrajectory) {
  const ModelSpec m = KnudsenGas::with_constant_temperature(Geometry::disk(1.0), AbsorbingWall{}, 1.0);
  RngStream rng(1, 1);
  PhaseState s = make_state(2, {0, 0, 0}, {1, 0, 0});
  s = step(m, s, 2.0, rng);
  EXPECT_FALSE(s.alive);
}

TEST(Step, KfpVelocitySecondMomentRelaxesToOne) {
  const ModelSpec m = KineticFokkerPlanck{1, Potential::quadratic(1.0), 2.0, 0.05};
  const long N = 20000;
  double s2 = 0.0;
  for (long i = 0; i < N; ++i) {
    RngStream rng(17, i);
    PhaseState s = make_state(1, {2.0, 0, 0}, {-1.0, 0, 0});
    advance(m, s, 12.0, rng);
    s2 += s.v[0] * s.v[0];
  }
  EXPECT_NEAR(s2 / N, 1.0, 3.0 * std::sqrt(2.0 / N));
}

TEST(Step, DiffusionStabilityLimit) {
  const ModelSpec m = KineticFokkerPlanck{1, Potential::quadratic(4.0), 2.0, 0.05};
  RngStream rng;
  PhaseState s = make_state(1, {0, 0, 0}, {0, 0, 0});
  try {
    step(m, s, 1.0, rng);
    FAIL() << "expected stability_error";
  } catch (const stability_error& e) {
    EXPECT_NEAR(e.limit, 0.5, 1e-15);
  }
  EXPECT_THROW(step(FitzHughNagumo{}, s, 0.5, rng), stability_error);
  EXPECT_THROW(step(m, s, 0.0, rng), invalid_input);
}

TEST(Step, SuperquadraticFrictionStaysFinite) {
  const ModelSpec m = KineticFokkerPlanck{2, Potential::power(2.0), 4.0, 0.01};
  RngStream rng(2, 2);
  PhaseState s = make_state(2, {1, 1, 0}, {30, -30, 0});
  advance(m, s, 5.0, rng);
  EXPECT_TRUE(finite_state(s));
  EXPECT_LT(norm(s.v, 2), 10.0);
}

TEST(Thinning, BoltzmannNoCollisionProbability) {
  // Between collisions v is constant on the torus without potential.
  const LinearBoltzmann lb{2, 1.0, 1.0, true, Potential::none()};
  const ModelSpec m = lb;
  const Vec v0{1.5, -0.5, 0};
  const double dt = 0.4;
  const long N = 100000;
  long same = 0;
  for (long i = 0; i < N; ++i) {
    RngStream rng(31, i);
    PhaseState s = step(m, make_state(2, {0.2, 0.2, 0}, v0), dt, rng);
    same += s.v == v0;
  }
  const double p = std::exp(-lb.b_const * collision_frequency(v0, 1.0, 2) * dt);
  EXPECT_NEAR(static_cast<double>(same) / N, p, 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST(Thinning, DegenerateNoScatterProbability) {
  DegenerateBoltzmann db;
  db.d = 1;
  db.sigma = [](const Vec&) { return 0.7; };
  db.sigma_inf = 1.0;
  const ModelSpec m = db;
  const double dt = 1.3;
  const long N = 100000;
  long same = 0;
  for (long i = 0; i < N; ++i) {
    RngStream rng(32, i);
    PhaseState s = step(m, make_state(1, {0.2, 0, 0}, {0.25, 0, 0}), dt, rng);
    same += s.v[0] == 0.25;
  }
  const double p = std::exp(-0.7 * dt);
  EXPECT_NEAR(static_cast<double>(same) / N, p, 3.0 * std::sqrt(p * (1 - p) / N));
}

TEST(Thinning, DegenerateRejectsSigmaAboveBound) {
  DegenerateBoltzmann db;
  db.sigma = [](const Vec&) { return 2.0; };
  db.sigma_inf = 1.0;
  RngStream rng;
  EXPECT_THROW(step(db, make_state(1, {0.2, 0, 0}, {0.25, 0, 0}), 50.0, rng), invalid_input);
}

TEST(Step, ReproducibleFromSeedPair) {
  const ModelSpec m = RunTumble{};
  auto run = [&] {
    RngStream rng(99, 7);
    PhaseState s = make_state(2, {0.5, -0.5, 0}, {0.1, 0.2, 0});
    for (int k = 0; k < 100; ++k) s = step(m, s, 0.3, rng);
    return s;
  };
  EXPECT_EQ(run(), run());
}

TEST(Step, RunTumbleVelocityStaysInBall) {
  const RunTumble rt;
  RngStream rng(5, 5);
  PhaseState s = make_state(2, {3, 0, 0}, {0, 0, 0});
  for (int k = 0; k < 500; ++k) {
    s = step(rt, s, 0.5, rng);
    EXPECT_LE(norm(s.v, 2), rt.R0 + 1e-15);
  }
}

TEST(Equilibrium, TorusBgkIsUniformTimesGaussian) {
  const ModelSpec m = LinearBGK{1, true, Potential::none()};
  const long N = 100000;
  std::vector<double> x(N), v(N);
  for (long i = 0; i < N; ++i) {
    RngStream rng(44, i);
    const auto s = equilibrium_sampler(m, rng);
    x[i] = s.x[0], v[i] = s.v[0];
  }
  EXPECT_GT(stats::ks_one_sample(x, [](double t) { return std::clamp(t, 0.0, 1.0); }).p_value, 0.01);
  EXPECT_GT(stats::ks_one_sample(v, std_normal_cdf).p_value, 0.01);
}

TEST(Equilibrium, QuadraticPositionMoments) {
  const ModelSpec m = KineticFokkerPlanck{2, Potential::quadratic(2.0), 2.0, 0.05};
  const long N = 100000;
  double m1 = 0, m2 = 0;
  for (long i = 0; i < N; ++i) {
    RngStream rng(45, i);
    const auto s = equilibrium_sampler(m, rng);
    m1 += s.x[0], m2 += s.x[0] * s.x[0];
  }
  const double sq = std::sqrt(static_cast<double>(N));
  EXPECT_NEAR(m1 / N, 0.0, 3.0 / sq);
  EXPECT_NEAR(m2 / N, 0.5, 3.0 / sq);
}

TEST(Equilibrium, PowerPotentialAcceptanceAndMarginal) {
  const ModelSpec m = LinearBGK{1, false, Potential::power(2.0)};
  SamplerStats st;
  const long N = 100000;
  std::vector<double> x(N);
  for (long i = 0; i < N; ++i) {
    RngStream rng(46, i);
    x[i] = equilibrium_sampler(m, rng, &st).x[0];
  }
  EXPECT_GT(st.acceptance(), 0.1);
  // e^{-<x>^2/2} is proportional to the standard normal density.
  EXPECT_GT(stats::ks_one_sample(x, std_normal_cdf).p_value, 0.01);
}

TEST(Equilibrium, UnsupportedModels) {
  RngStream rng;
  EXPECT_THROW(equilibrium_sampler(RunTumble{}, rng), unsupported);
  EXPECT_THROW(equilibrium_sampler(FitzHughNagumo{}, rng), unsupported);
  EXPECT_THROW(equilibrium_sampler(KnudsenGas::with_constant_temperature(Geometry::interval(), AbsorbingWall{}, 1.0), rng),
               unsupported);
}
