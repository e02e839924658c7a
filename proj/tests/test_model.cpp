#include "seema/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seema/numerics.hpp"
#include "seema/rng.hpp"

using namespace seema;

namespace {

// Quadrature oracle for region probabilities: integrate the conditional
// density over the region directly, independent of the erfc path used by
// transmission_probs.
double quadrature_region_prob(const TransmissionRegion& region,
                              const ScalarGaussianModel& m, Hypothesis h) {
  const double lo = m.mean(h) - 12.0 * m.stddev(h);
  const double hi = m.mean(h) + 12.0 * m.stddev(h);
  return integrate(
      [&](double x) { return region_contains(region, x) ? m.density(x, h) : 0.0; },
      lo, hi, 1e-12);
}

const ScalarGaussianModel kVarianceModel =
    ScalarGaussianModel::gaussian_variance(3.0, 1.0);

}  // namespace

TEST(TransmissionProbs, TwoSidedGaussianVarianceMatchesTailOracle) {
  const TransmissionRegion region = TwoSidedRegion{1.9};
  const TransmissionProbs p = transmission_probs(region, kVarianceModel);
  // 2 Q(1.9) and 2 Q(0.95), frozen from a high-precision erf evaluation.
  EXPECT_NEAR(p.p0, 0.057433119632003599, 1e-14);
  EXPECT_NEAR(p.p1, 0.34211225261696362, 1e-14);
  EXPECT_NEAR(p.p0, quadrature_region_prob(region, kVarianceModel, Hypothesis::H0),
              1e-9);
  EXPECT_NEAR(p.p1, quadrature_region_prob(region, kVarianceModel, Hypothesis::H1),
              1e-9);
}

TEST(TransmissionProbs, WholeLineRegionIsDegenerate) {
  const TransmissionRegion region =
      OneSidedRegion{-std::numeric_limits<double>::infinity()};
  const TransmissionProbs raw =
      transmission_probs_unchecked(region, kVarianceModel);
  EXPECT_EQ(raw.p0, 1.0);
  EXPECT_EQ(raw.p1, 1.0);
  try {
    transmission_probs(region, kVarianceModel);
    FAIL() << "expected DegenerateRegionError";
  } catch (const DegenerateRegionError& e) {
    EXPECT_EQ(e.p0(), 1.0);
    EXPECT_EQ(e.p1(), 1.0);
  }
}

TEST(TransmissionProbs, DcModelOneSided) {
  const ScalarGaussianModel dc = ScalarGaussianModel::dc_in_awgn(2.0, 1.0);
  const TransmissionRegion region = OneSidedRegion{1.0};
  const TransmissionProbs p = transmission_probs(region, dc);
  EXPECT_NEAR(p.p0, gaussian_q(1.0), 1e-15);
  EXPECT_NEAR(p.p1, gaussian_q(-1.0), 1e-15);
  EXPECT_NEAR(p.p0, quadrature_region_prob(region, dc, Hypothesis::H0), 1e-9);
  EXPECT_NEAR(p.p1, quadrature_region_prob(region, dc, Hypothesis::H1), 1e-9);
}

TEST(TransmissionProbs, GeneralRegion1dMatchesClosedForm) {
  GeneralRegion region;
  region.indicator = [](std::span<const double> x) { return x[0] > 1.9 || x[0] < -1.9; };
  region.box_lo = {-30.0};
  region.box_hi = {30.0};
  const TransmissionProbs p =
      transmission_probs(TransmissionRegion{region}, kVarianceModel);
  EXPECT_NEAR(p.p0, 0.057433119632003599, 1e-8);
  EXPECT_NEAR(p.p1, 0.34211225261696362, 1e-8);
  EXPECT_EQ(p.se0, 0.0);
}

TEST(TransmissionProbs, GeneralRegionMultiDimQmcWithStandardError) {
  // Product region {x1 > 0.5, x2 > 1.0}: probability factorizes.
  GeneralRegion region;
  region.indicator = [](std::span<const double> x) {
    return x[0] > 0.5 && x[1] > 1.0;
  };
  region.box_lo = {-10.0, -10.0};
  region.box_hi = {10.0, 10.0};
  const ScalarGaussianModel m = ScalarGaussianModel::gaussian_variance(0.0, 1.0);
  const TransmissionProbs p =
      transmission_probs_unchecked(TransmissionRegion{region}, m);
  const double expected = gaussian_q(0.5) * gaussian_q(1.0);
  EXPECT_GT(p.se0, 0.0);
  EXPECT_NEAR(p.p0, expected, std::max(4.0 * p.se0, 2e-4));
}

TEST(TransmissionProbs, MonotoneNonincreasingInThreshold) {
  double prev_p0 = 1.0, prev_p1 = 1.0;
  for (double xl = 0.0; xl <= 4.0; xl += 0.25) {
    const TransmissionProbs p =
        transmission_probs_unchecked(TwoSidedRegion{xl}, kVarianceModel);
    EXPECT_LE(p.p0, prev_p0 + 1e-15);
    EXPECT_LE(p.p1, prev_p1 + 1e-15);
    prev_p0 = p.p0;
    prev_p1 = p.p1;
  }
  double prev = 1.0;
  for (double xl = -4.0; xl <= 4.0; xl += 0.5) {
    const TransmissionProbs p =
        transmission_probs_unchecked(OneSidedRegion{xl}, kVarianceModel);
    EXPECT_LE(p.p0, prev + 1e-15);
    prev = p.p0;
  }
}

TEST(TransmissionProbs, MembershipFrequencyMatchesProbability) {
  const TransmissionRegion region = TwoSidedRegion{1.9};
  const TransmissionProbs p = transmission_probs(region, kVarianceModel);
  Rng rng(20240517);
  constexpr int kSamples = 1'000'000;
  for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
    int hits = 0;
    for (int i = 0; i < kSamples; ++i) {
      hits += region_contains(region, kVarianceModel.sample(h, rng)) ? 1 : 0;
    }
    const double expect = h == Hypothesis::H0 ? p.p0 : p.p1;
    const double se = std::sqrt(expect * (1.0 - expect) / kSamples);
    EXPECT_NEAR(static_cast<double>(hits) / kSamples, expect, 4.0 * se);
  }
}

TEST(ObservationModel, SamplerAgreesWithDensityCdf) {
  Rng rng(7);
  constexpr int kSamples = 200'000;
  for (const auto& m : {kVarianceModel, ScalarGaussianModel::dc_in_awgn(2.0, 1.5)}) {
    for (Hypothesis h : {Hypothesis::H0, Hypothesis::H1}) {
      std::vector<double> xs(kSamples);
      for (double& x : xs) x = m.sample(h, rng);
      for (double q : {-1.0, 0.0, 0.8, 2.2}) {
        int below = 0;
        for (double x : xs) below += x < q ? 1 : 0;
        const double expect = m.cdf(q, h);
        const double se = std::sqrt(expect * (1.0 - expect) / kSamples);
        EXPECT_NEAR(static_cast<double>(below) / kSamples, expect, 4.0 * se);
      }
      // Density integrates to the CDF increment.
      const double mass = integrate([&](double x) { return m.density(x, h); },
                                    -1.0, 2.2, 1e-10);
      EXPECT_NEAR(mass, m.cdf(2.2, h) - m.cdf(-1.0, h), 1e-9);
    }
  }
}

TEST(Amplification, MatchesLogRatio) {
  // log(27/7), frozen from an arbitrary-precision evaluation.
  EXPECT_NEAR(amplification(0.1, 0.3), 1.3499267169490158, 1e-15);
  EXPECT_EQ(amplification(0.25, 0.25), 0.0);
  EXPECT_NEAR(amplification(0.3, 0.1), -1.3499267169490158, 1e-15);
  EXPECT_NEAR(amplification(0.1, 0.3), -amplification(0.3, 0.1), 1e-15);
  EXPECT_GT(amplification(0.2, 0.21), 0.0);
  EXPECT_THROW(amplification(0.0, 0.5), std::domain_error);
  EXPECT_THROW(amplification(0.5, 1.0), std::domain_error);
}

TEST(SensorProfile, RequiresMoreLikelyTransmissionUnderH1) {
  EXPECT_THROW(SensorProfile::make(0.3, 0.1, TwoSidedRegion{1.0}),
               std::invalid_argument);
  const SensorProfile s = SensorProfile::from_region(TwoSidedRegion{1.9},
                                                     kVarianceModel);
  EXPECT_GT(s.amplitude, 0.0);
  EXPECT_NEAR(s.amplitude, amplification(s.p0, s.p1), 0.0);
}

TEST(CalibrateRegion, ReproducesTwoSidedThreshold) {
  // sigma_theta^2 = 3, sigma_v^2 = 1, equal priors, 0.2 transmit budget.
  const TransmissionRegion region =
      calibrate_region(kVarianceModel, Priors{}, 0.2, RegionShape::TwoSided);
  const double xl = std::get<TwoSidedRegion>(region).x_lower;
  EXPECT_NEAR(xl, 1.8988207076427584, 1e-6);
  EXPECT_NEAR(xl, 1.90, 0.02);
  const TransmissionProbs p = transmission_probs(region, kVarianceModel);
  EXPECT_NEAR(0.5 * p.p0 + 0.5 * p.p1, 0.2, 1e-8);
}

TEST(CalibrateRegion, ReproducesGroupedThreshold) {
  const std::vector<ModelGroup> groups = {
      {0.5, ScalarGaussianModel::gaussian_variance(3.0, 1.0)},
      {0.5, ScalarGaussianModel::gaussian_variance(4.0, 1.0)},
  };
  const TransmissionRegion region = calibrate_region(
      std::span<const ModelGroup>(groups), Priors{}, 0.2, RegionShape::TwoSided);
  const double xl = std::get<TwoSidedRegion>(region).x_lower;
  EXPECT_NEAR(xl, 1.9708551645218099, 1e-6);
  EXPECT_NEAR(xl, 1.97, 0.02);
  EXPECT_NEAR(expected_transmit_fraction(std::span<const ModelGroup>(groups),
                                         Priors{}, RegionShape::TwoSided, xl),
              0.2, 1e-8);
}

TEST(CalibrateRegion, UnreachableTargetFails) {
  EXPECT_THROW(
      calibrate_region(kVarianceModel, Priors{}, 1.0, RegionShape::TwoSided),
      CalibrationError);
  EXPECT_THROW(
      calibrate_region(kVarianceModel, Priors{}, 0.0, RegionShape::TwoSided),
      CalibrationError);
}

TEST(CalibrateRegion, OneSidedRoundTrip) {
  const ScalarGaussianModel dc = ScalarGaussianModel::dc_in_awgn(2.0, 1.0);
  for (double target : {0.1, 0.35, 0.62}) {
    const TransmissionRegion region =
        calibrate_region(dc, Priors{0.3, 0.7}, target, RegionShape::OneSided);
    const TransmissionProbs p = transmission_probs(region, dc);
    EXPECT_NEAR(0.3 * p.p0 + 0.7 * p.p1, target, 1e-8);
  }
}
