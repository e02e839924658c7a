#include "seema/markov.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seema/infotheory.hpp"
#include "seema/rng.hpp"

using namespace seema;

namespace {

// Dominant-eigenvalue oracle from the characteristic polynomial in
// trace/determinant form; a different arithmetic route than the
// implementation's stable (a-d)/2 form.
double dominant_eig_oracle(const Matrix2& m) {
  const double tr = m.a + m.d;
  const double det = m.a * m.d - m.b * m.c;
  return 0.5 * tr + std::sqrt(0.25 * tr * tr - det);
}

const MarkovField kSectionIvField{{0.65, 0.35}, {0.35, 0.65}, std::nullopt};

}  // namespace

TEST(SampleField, AbsorbingConstruction) {
  // alpha, beta at the boundary are rejected by validation; emulate the
  // absorbing all-zeros chain through near-one parameters.
  MarkovField field{{1.0 - 1e-12, 1e-12}, {0.5, 0.5}, 0};
  Rng rng(1);
  const auto v = sample_field(field, Hypothesis::H0, 2000, rng);
  for (auto b : v) EXPECT_EQ(b, 0);
}

TEST(SampleField, MemorylessSpecialCaseIsFairIid) {
  MarkovField field{{0.5, 0.5}, {0.5, 0.5}, std::nullopt};
  Rng rng(2);
  const int n = 200'000;
  const auto v = sample_field(field, Hypothesis::H0, n, rng);
  long ones = 0;
  for (auto b : v) ones += b;
  const double freq = static_cast<double>(ones) / n;
  EXPECT_NEAR(freq, 0.5, 4.0 * std::sqrt(0.25 / n));
}

TEST(SampleField, StationaryOneFrequency) {
  // (1-alpha)/((1-alpha)+(1-beta)) = 0.35 for alpha=0.65, beta=0.35.
  EXPECT_NEAR(kSectionIvField.h0.stationary_one_prob(), 0.35, 1e-15);
  Rng rng(3);
  const int n = 400'000;
  const auto v = sample_field(kSectionIvField, Hypothesis::H0, n, rng);
  long ones = 0;
  for (auto b : v) ones += b;
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.35,
              4.0 * std::sqrt(0.35 * 0.65 / n));
}

TEST(SampleField, TransitionCountsConvergeToMatrix) {
  MarkovField field{{0.8, 0.55}, {0.5, 0.5}, std::nullopt};
  Rng rng(4);
  const int n = 500'000;
  const auto v = sample_field(field, Hypothesis::H0, n, rng);
  long n00 = 0, n01 = 0, n10 = 0, n11 = 0;
  for (int i = 1; i < n; ++i) {
    if (v[i - 1] == 0) {
      (v[i] == 0 ? n00 : n01) += 1;
    } else {
      (v[i] == 1 ? n11 : n10) += 1;
    }
  }
  const double from0 = static_cast<double>(n00 + n01);
  const double from1 = static_cast<double>(n10 + n11);
  EXPECT_NEAR(n00 / from0, 0.8, 4.0 * std::sqrt(0.8 * 0.2 / from0));
  EXPECT_NEAR(n11 / from1, 0.55, 4.0 * std::sqrt(0.55 * 0.45 / from1));
}

TEST(TiltedMatrix, ZeroTiltRecoversTransitionMatrix) {
  auto unit_mgf = [](double t) { return std::exp(t); };
  const Matrix2 m = tilted_matrix(kSectionIvField, Hypothesis::H0, 0.0, unit_mgf);
  EXPECT_EQ(m.a, 0.65);
  EXPECT_EQ(m.b, 0.35);
  EXPECT_EQ(m.c, 0.65);
  EXPECT_EQ(m.d, 0.35);
}

TEST(TiltedMatrix, StateOneColumnsPickUpTheMgf) {
  auto unit_mgf = [](double t) { return std::exp(t); };
  const Matrix2 m = tilted_matrix(kSectionIvField, Hypothesis::H0, 1.0, unit_mgf);
  EXPECT_NEAR(m.b, 0.35 * std::exp(1.0), 1e-15);
  EXPECT_NEAR(m.d, 0.35 * std::exp(1.0), 1e-15);  // pi(1,1) E[e^{th}]
  EXPECT_EQ(m.a, 0.65);
  EXPECT_EQ(m.c, 0.65);

  auto kappa = [](double) { return 2.75; };
  const Matrix2 g = tilted_matrix(MarkovField{{0.7, 0.6}, {0.5, 0.5}, {}},
                                  Hypothesis::H0, 0.3, kappa);
  EXPECT_NEAR(g.d, 0.6 * 2.75, 1e-15);
  EXPECT_NEAR(g.b, 0.3 * 2.75, 1e-15);
}

TEST(PerronEigenvalue, StochasticMatrixHasUnitRoot) {
  for (double alpha : {0.1, 0.5, 0.65, 0.93}) {
    for (double beta : {0.2, 0.35, 0.8}) {
      const Matrix2 m{alpha, 1.0 - alpha, 1.0 - beta, beta};
      EXPECT_EQ(perron_eigenvalue(m), 1.0);
    }
  }
}

TEST(PerronEigenvalue, MatchesQuadraticOracleOnRandomMatrices) {
  Rng rng(777);
  for (int rep = 0; rep < 10'000; ++rep) {
    const double alpha = 0.01 + 0.98 * rng.uniform();
    const double beta = 0.01 + 0.98 * rng.uniform();
    const double kappa = std::exp(std::log(1e3) * (rng.uniform() * 2.0 - 1.0));
    const Matrix2 m{alpha, (1.0 - alpha) * kappa, 1.0 - beta, beta * kappa};
    const double rho = perron_eigenvalue(m);
    const double oracle = dominant_eig_oracle(m);
    EXPECT_NEAR(rho, oracle, 1e-12 * std::max(1.0, oracle));
    EXPECT_GE(rho, oracle - 1e-10);
  }
}

TEST(PerronEigenvalue, ReducibleMatrixRejected) {
  EXPECT_THROW(perron_eigenvalue(Matrix2{1.0, 0.0, 0.5, 0.5}),
               std::domain_error);
  EXPECT_THROW(perron_eigenvalue(Matrix2{0.5, 0.5, 0.0, 1.0}),
               std::domain_error);
  EXPECT_THROW(perron_eigenvalue(Matrix2{0.5, -0.1, 0.5, 0.5}),
               std::domain_error);
}

TEST(PerronEigenvalue, MemorylessReductionIsBernoulliMgf) {
  // alpha = beta = 0.5 with unit channel: rho = (1 + e^t)/2.
  for (double t : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
    const double kappa = std::exp(t);
    const Matrix2 m{0.5, 0.5 * kappa, 0.5, 0.5 * kappa};
    EXPECT_NEAR(perron_eigenvalue(m), 0.5 * (1.0 + kappa), 1e-13 * (1.0 + kappa));
  }
}

TEST(PerronEigenvalue, IidReductionReproducesBernoulliLogMgf) {
  // alpha = 1 - beta makes the rows identical: i.i.d. Bernoulli(beta).
  const ChannelModel unit = ChannelModel::equal(1.0);
  for (double beta : {0.2, 0.35, 0.7}) {
    MarkovField field{{1.0 - beta, beta}, {0.5, 0.5}, std::nullopt};
    for (double t = -6.0; t <= 6.0 + 1e-9; t += 0.25) {
      const double lhs = markov_log_mgf(field, Hypothesis::H0, unit, t);
      const double rhs = log_mgf_bernoulli(beta, t);
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(MarkovLogMgf, LogConvexInT) {
  const ChannelModel unit = ChannelModel::equal(1.0);
  MarkovField field{{0.8, 0.55}, {0.5, 0.5}, std::nullopt};
  for (double a = -5.0; a <= 4.0; a += 0.5) {
    const double b = a + 1.0;
    const double lhs = markov_log_mgf(field, Hypothesis::H0, unit, 0.5 * (a + b));
    const double rhs = 0.5 * (markov_log_mgf(field, Hypothesis::H0, unit, a) +
                              markov_log_mgf(field, Hypothesis::H0, unit, b));
    EXPECT_LE(lhs, rhs + 1e-12);
  }
}

TEST(MarkovRateFunction, VanishesAtStationaryMean) {
  const ChannelModel unit = ChannelModel::equal(1.0);
  const double mean = kSectionIvField.h0.stationary_one_prob();
  const LegendreResult r =
      markov_rate_function(kSectionIvField, Hypothesis::H0, unit, mean);
  EXPECT_NEAR(r.value, 0.0, 1e-10);
}

TEST(MarkovRateFunction, MemorylessCaseIsBernoulliKl) {
  const ChannelModel unit = ChannelModel::equal(1.0);
  MarkovField field{{0.5, 0.5}, {0.5, 0.5}, std::nullopt};
  for (double x : {0.1, 0.35, 0.62, 0.9}) {
    const LegendreResult r =
        markov_rate_function(field, Hypothesis::H0, unit, x);
    EXPECT_NEAR(r.value, kl_bernoulli(x, 0.5), 1e-8);
  }
}

TEST(MarkovRateFunction, SectionIvParametersReduceToIid) {
  // alpha0 = 1 - beta0 = 0.65: the chain is i.i.d. Bernoulli(0.35), so the
  // rate at the midpoint threshold x = 0.5 is D(0.5 || 0.35) under H0 and
  // D(0.5 || 0.65) under H1, equal by symmetry.
  const ChannelModel unit = ChannelModel::equal(1.0);
  const LegendreResult r0 =
      markov_rate_function(kSectionIvField, Hypothesis::H0, unit, 0.5);
  const LegendreResult r1 =
      markov_rate_function(kSectionIvField, Hypothesis::H1, unit, 0.5);
  EXPECT_NEAR(r0.value, kl_bernoulli(0.5, 0.35), 1e-9);
  EXPECT_NEAR(r1.value, kl_bernoulli(0.5, 0.65), 1e-9);
  EXPECT_NEAR(r0.value, r1.value, 1e-9);
}
