#include "seema/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seema/numerics.hpp"
#include "seema/rng.hpp"

using namespace seema;

namespace {

// Brute-force oracle: E[e^{t A h}] by adaptive quadrature over the Rayleigh
// density (2h/P_r) e^{-h^2/P_r}.
double rayleigh_mgf_quadrature(double t, double pr, double ak) {
  const double upper =
      12.0 * std::sqrt(pr) + std::max(0.0, t * ak) * pr + 5.0;
  return integrate(
      [&](double h) {
        return std::exp(t * ak * h) * (2.0 * h / pr) * std::exp(-h * h / pr);
      },
      0.0, upper, 1e-12);
}

}  // namespace

TEST(RayleighMgf, UnityAtZero) {
  EXPECT_EQ(rayleigh_mgf(0.0, 1.0, 1.0), 1.0);
  EXPECT_EQ(rayleigh_mgf(0.0, 2.5, -3.0), 1.0);
}

TEST(RayleighMgf, MatchesQuadratureOracle) {
  for (double pr : {0.5, 1.0, 2.0}) {
    for (double ak : {1.0, 0.5, 2.0, -1.3}) {
      for (double t = -5.0; t <= 5.0 + 1e-9; t += 0.5) {
        const double closed = rayleigh_mgf(t, pr, ak);
        const double oracle = rayleigh_mgf_quadrature(t, pr, ak);
        EXPECT_NEAR(closed, oracle, 1e-8 * std::max(1.0, oracle))
            << "t=" << t << " pr=" << pr << " ak=" << ak;
      }
    }
  }
}

TEST(RayleighMgf, DerivativeAtZeroIsScaledMean) {
  for (double pr : {0.5, 1.0, 2.0}) {
    for (double ak : {1.0, 1.7}) {
      const double h = 1e-6;
      const double deriv =
          (rayleigh_mgf(h, pr, ak) - rayleigh_mgf(-h, pr, ak)) / (2.0 * h);
      const double mean = 0.5 * kSqrtPi * std::sqrt(pr);
      EXPECT_NEAR(deriv, ak * mean, 1e-6);
    }
  }
}

TEST(RayleighMgf, StableDeepInTheLeftTail) {
  // Large negative arguments must stay positive and tend to zero.
  double prev = 1.0;
  for (double t : {-10.0, -30.0, -80.0, -200.0}) {
    const double v = rayleigh_mgf(t, 1.0, 1.9);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_TRUE(std::isinf(rayleigh_mgf(100.0, 4.0, 2.0)));
}

TEST(ChannelModel, MeansAndMgfs) {
  const ChannelModel eq = ChannelModel::equal(1.0);
  EXPECT_EQ(eq.mean(), 1.0);
  EXPECT_EQ(eq.mgf(0.0), 1.0);
  EXPECT_NEAR(eq.mgf(1.3), std::exp(1.3), 1e-15);
  EXPECT_EQ(eq.h_max().value(), 1.0);

  const ChannelModel ray = ChannelModel::rayleigh(1.0);
  // sqrt(pi/4), frozen from the Rayleigh mean identity.
  EXPECT_NEAR(ray.mean(), 0.88622692545275805, 1e-15);
  EXPECT_EQ(ray.mgf(0.0), 1.0);
  EXPECT_FALSE(ray.h_max().has_value());

  const ChannelModel oo = ChannelModel::on_off(0.3, 2.0);
  EXPECT_NEAR(oo.mean(), 0.6, 1e-15);
  EXPECT_EQ(oo.h_max().value(), 2.0);
  for (double t : {-2.0, 0.0, 0.7, 3.0}) {
    EXPECT_EQ(oo.mgf(t), 0.3 * std::exp(2.0 * t) + 0.7);
  }
}

TEST(ChannelModel, SamplerMomentsMatchAnalytic) {
  Rng rng(404);
  constexpr int kSamples = 1'000'000;
  struct Case {
    ChannelModel model;
    double mean;
    double second_moment;
  };
  const std::vector<Case> cases = {
      {ChannelModel::equal(1.5), 1.5, 2.25},
      {ChannelModel::rayleigh(2.0), 0.5 * kSqrtPi * std::sqrt(2.0), 2.0},
      {ChannelModel::on_off(0.3, 2.0), 0.6, 1.2},
  };
  for (const Case& c : cases) {
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double h = c.model.sample(rng);
      s1 += h;
      s2 += h * h;
    }
    const double m1 = s1 / kSamples;
    const double m2 = s2 / kSamples;
    const double var = c.second_moment - c.mean * c.mean;
    const double se1 = std::sqrt(std::max(var, 1e-30) / kSamples);
    EXPECT_NEAR(m1, c.mean, std::max(4.0 * se1, 1e-12));
    EXPECT_NEAR(m2, c.second_moment, 4.0 * std::sqrt(8.0 / kSamples) + 1e-12);
  }
}

TEST(ChannelModel, LogMgfMidpointConvex) {
  for (const ChannelModel& m :
       {ChannelModel::equal(1.0), ChannelModel::rayleigh(1.0),
        ChannelModel::on_off(0.4, 1.5)}) {
    for (double a = -4.0; a <= 3.0; a += 0.5) {
      const double b = a + 1.0;
      const double mid = 0.5 * (a + b);
      const double lhs = std::log(m.mgf(mid));
      const double rhs = 0.5 * (std::log(m.mgf(a)) + std::log(m.mgf(b)));
      EXPECT_LE(lhs, rhs + 1e-12);
    }
  }
}

TEST(ChooseZ, MatchesChannelMean) {
  EXPECT_EQ(choose_Z(ChannelModel::equal(1.0)), 1.0);
  EXPECT_EQ(choose_Z(ChannelModel::equal(2.5)), 2.5);
  EXPECT_NEAR(choose_Z(ChannelModel::rayleigh(1.0)), 0.88622692545275805, 1e-15);
  EXPECT_NEAR(choose_Z(ChannelModel::on_off(0.3, 2.0)), 0.6, 1e-15);
}

TEST(NoiseSpec, SamplerIsZeroMeanWithSubGaussianMgf) {
  Rng rng(987);
  constexpr int kSamples = 1'000'000;
  for (const NoiseSpec& spec :
       {NoiseSpec::gaussian(2.0), NoiseSpec::bounded_plus_gaussian(1.0, 0.5)}) {
    std::vector<double> w(kSamples);
    double mean = 0.0;
    for (double& x : w) {
      x = spec.sample(rng);
      mean += x;
    }
    mean /= kSamples;
    EXPECT_NEAR(mean, 0.0, 4.0 * std::sqrt(spec.variance_proxy() / kSamples));
    for (double s : {-1.0, -0.4, 0.4, 1.0}) {
      double mgf = 0.0;
      for (double x : w) mgf += std::exp(s * x);
      mgf /= kSamples;
      const double bound = std::exp(0.5 * spec.variance_proxy() * s * s);
      EXPECT_LE(mgf, bound * 1.01) << "s=" << s;
    }
  }
  EXPECT_EQ(NoiseSpec::gaussian(0.0).sample(rng), 0.0);
}

TEST(VerifyA1, EqualUnitGainsIid) {
  const SensorProfile p = SensorProfile::make(0.2, 0.5, TwoSidedRegion{1.0});
  const DetectorConfig cfg(1.0, 1.0, 10, {p});
  const A1Report r = verify_A1(cfg, ChannelModel::equal(1.0));
  EXPECT_NEAR(r.delta0, kl_bernoulli(0.2, 0.5), 1e-14);
  EXPECT_NEAR(r.delta1, kl_bernoulli(0.5, 0.2), 1e-14);
  ASSERT_TRUE(r.n0.has_value());
  EXPECT_EQ(*r.n0, 1);
}

TEST(VerifyA1, MinimalSensorCountGrowsWithLogEta) {
  const SensorProfile p = SensorProfile::make(0.2, 0.5, TwoSidedRegion{1.0});
  int prev = 0;
  for (double log_eta : {2.0, 6.0, 18.0, 54.0}) {
    const DetectorConfig cfg(std::exp(log_eta), 1.0, 10, {p});
    const A1Report r = verify_A1(cfg, ChannelModel::equal(1.0));
    ASSERT_TRUE(r.n0.has_value());
    EXPECT_GE(*r.n0, prev);
    prev = *r.n0;
    // N0 scales like ceil(log eta / Dbar(p1||p0)).
    const double scale = log_eta / kl_bernoulli(0.5, 0.2);
    EXPECT_NEAR(*r.n0, scale, 2.0);
  }
}

TEST(VerifyA1, UnachievableWhenHypothesesCoincide) {
  const std::vector<SensorProfile> flat = {
      SensorProfile{0.3, 0.3, 0.0, TwoSidedRegion{1.0}}};
  const DetectorConfig cfg(2.0, 1.0, 10, flat);
  const A1Report r = verify_A1(cfg, ChannelModel::equal(1.0), 2000);
  EXPECT_FALSE(r.n0.has_value());
}

TEST(VerifyA1, UsesChannelMeanAndZ) {
  const SensorProfile p = SensorProfile::make(0.2, 0.5, TwoSidedRegion{1.0});
  const ChannelModel ray = ChannelModel::rayleigh(1.0);
  const DetectorConfig cfg(1.0, choose_Z(ray), 10, {p});
  const A1Report r = verify_A1(cfg, ray);
  // With Z equal to the channel mean the margins reduce to the KL margins.
  EXPECT_NEAR(r.delta0, kl_bernoulli(0.2, 0.5), 1e-14);
  EXPECT_NEAR(r.delta1, kl_bernoulli(0.5, 0.2), 1e-14);
}
