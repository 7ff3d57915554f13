#include "qi/sensing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace {

using qi::SystemParams;

constexpr double kPi = std::numbers::pi;

// Closed-form detected-idler moments. The chain never creates a self
// phase-sensitive moment on the idler, so Var = n(n+1) before the detector
// and eta^2 n^2 + eta n after binomial thinning.
struct Closed {
  double mean, variance;
};

Closed closed_moments(const SystemParams& p, double phi) {
  const double g = p.gain;
  const double n = g * p.kappa_i * p.n_s + (g - 1.0) * (p.kappa_s * p.n_s + p.n_b + 1.0) +
                   2.0 * std::cos(phi) * std::sqrt(p.kappa_extra) *
                       std::sqrt(g * (g - 1.0) * p.kappa_s * p.kappa_i * p.n_s * (p.n_s + 1.0));
  return {p.eta_d * n, p.eta_d * p.eta_d * n * n + p.eta_d * n};
}

double closed_snr(const SystemParams& p) {
  const Closed on = closed_moments(p, 0.0), off = closed_moments(p, kPi);
  const double m = p.modes, vel = m * p.eta_d * (p.gain - 1.0) * p.n_el;
  const double d = m * (on.mean - off.mean);
  const double s = std::sqrt(m * on.variance + vel) + std::sqrt(m * off.variance + vel);
  return 4.0 * d * d / (s * s);
}

SystemParams nominal() {
  SystemParams p;
  p.n_s = 3e-4;
  p.kappa_s = 0.038;
  p.kappa_i = 1.0;
  p.kappa_extra = 0.8;
  p.eta_d = 0.84;
  p.n_b = 95.0;
  p.n_el = 0.0;
  p.gain = 1.0 + 7.4e-5;
  p.modes = 1e12;
  return p;
}

SystemParams ideal() {
  SystemParams p = nominal();
  p.kappa_extra = 1.0;
  p.eta_d = 1.0;
  return p;
}

TEST(SystemParams, Validation) {
  EXPECT_NO_THROW(nominal().validate());
  SystemParams p = nominal();
  p.kappa_s = 1.2;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = nominal();
  p.gain = 0.99;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = nominal();
  p.n_b = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = nominal();
  p.modes = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = nominal();
  p.kappa_s = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.n_b = 0.0;
  EXPECT_NO_THROW(p.validate());

  p = nominal();
  p.set_bandwidth_time(1.89e12, 2.0);
  EXPECT_DOUBLE_EQ(p.modes, 3.78e12);
  p.modes = 1e12;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(ReceiverMoments, AmplifierOff) {
  SystemParams p = nominal();
  p.gain = 1.0;
  p.eta_d = 1.0;
  for (double phi : {0.0, 1.0, kPi}) EXPECT_NEAR(qi::qi_receiver_moments(p, phi).mean, p.kappa_i * p.n_s, 1e-12 * p.n_s);
}

TEST(ReceiverMoments, NominalExample) {
  const SystemParams p = ideal();
  const auto on = qi::qi_receiver_moments(p, 0.0);
  const auto off = qi::qi_receiver_moments(p, kPi);
  EXPECT_NEAR(on.mean, 7.462e-3, 1e-6);
  EXPECT_NEAR(on.mean - off.mean, 1.162e-4, 1e-7);
  EXPECT_NEAR(on.mean, 0.007462123491958643, 1e-15);
  EXPECT_NEAR(on.mean - off.mean, 1.1620089673505113e-4, 1e-15);
}

TEST(ReceiverMoments, AgreeWithClosedFormOnRandomParameters) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    SystemParams p;
    p.n_s = std::pow(10.0, -6.0 + 6.0 * u(rng));
    p.kappa_s = u(rng) * 0.999;
    p.kappa_i = u(rng);
    p.kappa_extra = u(rng);
    p.eta_d = u(rng);
    p.n_b = 200.0 * u(rng);
    p.gain = 1.0 + std::pow(10.0, -7.0 + 7.0 * u(rng));
    const double phi = 2.0 * kPi * u(rng);
    const auto g = qi::qi_receiver_moments(p, phi);
    const auto c = closed_moments(p, phi);
    // Photon numbers come from covariances offset by 1/2, so tiny means lose digits.
    EXPECT_NEAR(g.mean, c.mean, 1e-9 * c.mean + 1e-16);
    EXPECT_NEAR(g.variance, c.variance, 1e-9 * c.variance + 1e-16);
  }
}

TEST(QiSnr, NoTargetGivesZero) {
  SystemParams p = nominal();
  p.kappa_s = 0.0;
  EXPECT_DOUBLE_EQ(qi::qi_snr_exact(p).snr_exact, 0.0);
  EXPECT_DOUBLE_EQ(qi::qi_snr_asymptotic(p), 0.0);
}

TEST(QiSnr, ZeroDenominator) {
  SystemParams p = nominal();
  p.n_s = 0.0;
  p.n_b = 0.0;
  p.gain = 1.0;
  EXPECT_THROW(qi::qi_snr_exact(p), qi::ZeroDenominator);
  // Electronics noise alone keeps the denominator finite only with G > 1.
  p.n_el = 5.0;
  EXPECT_THROW(qi::qi_snr_exact(p), qi::ZeroDenominator);
}

TEST(QiSnr, MatchesClosedForm) {
  SystemParams p = nominal();
  p.n_el = 11.4;
  EXPECT_NEAR(qi::qi_snr_exact(p).snr_exact / closed_snr(p), 1.0, 1e-10);
  EXPECT_DOUBLE_EQ(qi::electronics_noise_variance(p), 1e12 * 0.84 * (p.gain - 1.0) * 11.4);
}

TEST(QiSnr, ApproachesAsymptoteWhenAmplifiedBackgroundDominates) {
  // The asymptotic formula drops the idler's own photons; it is reached when
  // kappa_I N_S << (G-1) N_B and N_B >> 1.
  SystemParams p = ideal();
  p.n_s = 1e-7;
  p.n_b = 950.0;
  p.gain = 1.0 + 1e-6;
  const double ratio = qi::qi_snr_exact(p).snr_exact / (p.gain * qi::qi_snr_asymptotic(p));
  EXPECT_NEAR(ratio, 1.0, 0.01);
}

TEST(QiSnr, ThermalRolloverAtLargeGain) {
  SystemParams p = nominal();
  p.gain = 1.0 + 10.0 / p.n_b;
  EXPECT_LT(qi::qi_snr_exact(p).snr_exact, qi::qi_snr_asymptotic(p));
}

TEST(QiSnrAsymptotic, Examples) {
  const SystemParams p = nominal();
  EXPECT_NEAR(qi::qi_snr_asymptotic(p), 1.2902e6, 1.0e2);
  SystemParams q = p;
  q.modes *= 2.0;
  EXPECT_DOUBLE_EQ(qi::qi_snr_asymptotic(q), 2.0 * qi::qi_snr_asymptotic(p));
}

TEST(CiSnr, Examples) {
  const SystemParams p = nominal();
  EXPECT_NEAR(qi::ci_snr_asymptotic(p), 9.6e5, 1e-4);
  const auto r = qi::ci_snr_exact(p);
  EXPECT_NEAR(r.snr_exact, 16.0 * 0.038 * 1e12 * 3e-4 / (2.0 * 95.0 + 1.0), 1e-6);
  EXPECT_NEAR(r.snr_exact / qi::ci_snr_asymptotic(p), 190.0 / 191.0, 1e-12);
  EXPECT_NEAR(r.var_on, 95.5, 1e-9);

  SystemParams q = p;
  double last = r.snr_exact;
  for (double nb : {1e3, 1e5, 1e7}) {
    q.n_b = nb;
    const double s = qi::ci_snr_exact(q).snr_exact;
    EXPECT_LT(s, last);
    last = s;
  }
  EXPECT_LT(last, 1e-3 * r.snr_exact);
}

TEST(Advantage, ClosedFormValues) {
  // Calibrated receiver of the 20% claim, evaluated exactly.
  SystemParams p = nominal();
  p.n_el = 11.4;
  EXPECT_NEAR(qi::snr_advantage(p), 1.139657680390016, 1e-9);
  // Ideal receiver in the regime where the amplified background dominates.
  SystemParams q = ideal();
  q.n_s = 1e-7;
  q.n_b = 950.0;
  q.gain = 1.0 + 1e-6;
  EXPECT_NEAR(qi::snr_advantage(q), 1.995790897755483, 1e-9);
}

TEST(Advantage, LossyReceiverLoses) {
  SystemParams p = nominal();
  p.kappa_extra = 0.6;
  p.eta_d = 0.7;
  p.n_s = 1e-6;
  EXPECT_LT(p.kappa_extra * p.eta_d * p.kappa_i, 0.5);
  EXPECT_LT(qi::snr_advantage(p), 1.0);
}

TEST(Classicality, Examples) {
  SystemParams p = nominal();
  EXPECT_NEAR(qi::classicality_margin_db(p), 33.97809791982145, 1e-9);

  SystemParams bare = nominal();
  bare.kappa_s = 1.0;
  bare.kappa_i = 1.0;
  bare.n_b = 0.0;
  EXPECT_NEAR(qi::classicality_margin_db(bare), 10.0 * std::log10(p.n_s / (p.n_s + 1.0)), 1e-9);
  EXPECT_LT(qi::classicality_margin_db(bare), 0.0);

  double last = std::numeric_limits<double>::infinity();
  for (double k = 0.005; k < 0.99; k *= 1.5) {
    p.kappa_s = k;
    const double m = qi::classicality_margin_db(p);
    EXPECT_LT(m, last);
    last = m;
  }
  p.kappa_s = 0.0;
  EXPECT_THROW(qi::classicality_margin_db(p), std::domain_error);
}

TEST(BackgroundToReturn, Examples) {
  SystemParams p = nominal();
  EXPECT_NEAR(qi::background_to_return_db(p), 69.2, 0.05);
  p.kappa_s = std::pow(10.0, -1.4);
  p.n_s = 7.5e-5;
  EXPECT_NEAR(qi::background_to_return_db(p), 75.0, 0.05);
  p.n_b = p.kappa_s * p.n_s;
  EXPECT_NEAR(qi::background_to_return_db(p), 0.0, 1e-12);
  p.n_s = 0.0;
  EXPECT_THROW(qi::background_to_return_db(p), std::domain_error);
}

TEST(SnrReport, FieldsAreConsistent) {
  SystemParams p = nominal();
  p.n_el = 11.4;
  const auto r = qi::qi_snr_exact(p);
  EXPECT_GT(r.mean_on, r.mean_off);
  EXPECT_GT(r.var_on, r.var_off);
  EXPECT_NEAR(r.ratio_to_ci, r.snr_exact / qi::ci_snr_asymptotic(p), 1e-9 * r.ratio_to_ci);
  EXPECT_NEAR(r.classic_margin_db, qi::classicality_margin_db(p), 1e-12);
  EXPECT_NEAR(r.bg_to_return_db, qi::background_to_return_db(p), 1e-12);
  EXPECT_DOUBLE_EQ(qi::kOptimumReceiverGapDb, 3.0);
}

// Properties.

TEST(SensingProperties, PhaseSignSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  const SystemParams p = nominal();
  for (int i = 0; i < 50; ++i) {
    const double phi = u(rng);
    const auto a = qi::qi_receiver_moments(p, phi), b = qi::qi_receiver_moments(p, -phi);
    EXPECT_NEAR(a.mean, b.mean, 1e-16);
    EXPECT_NEAR(a.variance, b.variance, 1e-16);
  }
}

TEST(SensingProperties, MonotoneInEachParameter) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  auto snr = [](const SystemParams& p) { return qi::qi_snr_exact(p).snr_exact; };
  for (int i = 0; i < 100; ++i) {
    SystemParams p = nominal();
    p.kappa_s = u(rng) * 0.2;
    p.kappa_i = u(rng);
    p.kappa_extra = u(rng);
    p.eta_d = u(rng);
    p.n_b = 200.0 * u(rng);
    p.n_el = 20.0 * u(rng);
    const double base = snr(p);
    auto bumped = [&](double SystemParams::*field, double factor) {
      SystemParams q = p;
      q.*field *= factor;
      return snr(q);
    };
    EXPECT_GT(bumped(&SystemParams::kappa_s, 1.01), base);
    EXPECT_GT(bumped(&SystemParams::kappa_i, 1.01), base);
    EXPECT_GT(bumped(&SystemParams::kappa_extra, 1.01), base);
    EXPECT_GT(bumped(&SystemParams::eta_d, 1.01), base);
    EXPECT_GT(bumped(&SystemParams::modes, 1.01), base);
    EXPECT_LT(bumped(&SystemParams::n_b, 1.01), base);
    EXPECT_LT(bumped(&SystemParams::n_el, 1.01), base);
  }
}

TEST(SensingProperties, SingleInteriorMaximumInGain) {
  SystemParams p = nominal();
  p.n_el = 11.4;
  std::vector<double> s;
  for (double e = -7.0; e <= 0.0; e += 0.05) {
    p.gain = 1.0 + std::pow(10.0, e);
    s.push_back(qi::qi_snr_exact(p).snr_exact);
  }
  const auto peak = std::max_element(s.begin(), s.end()) - s.begin();
  ASSERT_GT(peak, 0);
  ASSERT_LT(peak, static_cast<long>(s.size()) - 1);
  for (long i = 0; i < peak; ++i) EXPECT_LT(s[i], s[i + 1]);
  for (long i = peak; i + 1 < static_cast<long>(s.size()); ++i) EXPECT_GT(s[i], s[i + 1]);
}

TEST(SensingProperties, CiExactOverAsymptote) {
  SystemParams p = nominal();
  for (double nb : {1.0, 10.0, 95.0, 1e4}) {
    p.n_b = nb;
    EXPECT_NEAR(qi::ci_snr_exact(p).snr_exact / qi::ci_snr_asymptotic(p), 2.0 * nb / (2.0 * nb + 1.0), 1e-12);
  }
}

}  // namespace
