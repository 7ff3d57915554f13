#include "qi/sensing.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace qi {

namespace {

constexpr int kSignal = 0;
constexpr int kIdler = 1;

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string("SystemParams: ") + name + " must lie in [0, 1]");
}

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("SystemParams: ") + name + " must be finite and non-negative");
}

double db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace

SystemParams& SystemParams::set_bandwidth_time(double w, double t) {
  bandwidth = w;
  duration = t;
  modes = w * t;
  return *this;
}

void SystemParams::validate() const {
  require_nonneg(n_s, "n_s");
  require_unit(kappa_s, "kappa_s");
  require_unit(kappa_i, "kappa_i");
  require_unit(kappa_extra, "kappa_extra");
  require_unit(eta_d, "eta_d");
  require_nonneg(n_b, "n_b");
  require_nonneg(n_el, "n_el");
  if (!(gain >= 1.0) || !std::isfinite(gain)) throw std::invalid_argument("SystemParams: gain must be >= 1");
  if (!(modes >= 1.0) || !std::isfinite(modes)) throw std::invalid_argument("SystemParams: mode count must be >= 1");
  require_nonneg(bandwidth, "bandwidth");
  require_nonneg(duration, "duration");
  if (bandwidth > 0.0 && duration > 0.0 && std::abs(modes - bandwidth * duration) > 1e-9 * modes)
    throw std::invalid_argument("SystemParams: mode count disagrees with bandwidth * duration");
  if (kappa_s == 1.0 && n_b > 0.0)
    throw std::invalid_argument("SystemParams: a lossless probe channel cannot inject background light");
  if (!std::isfinite(phi)) throw std::invalid_argument("SystemParams: phi must be finite");
}

double SystemParams::background_env_nbar() const { return n_b > 0.0 ? n_b / (1.0 - kappa_s) : 0.0; }

GaussianStateXd qi_receiver_input(const SystemParams& p, double phi) {
  p.validate();
  GaussianStateXd s = two_mode_squeeze(vacuum<double>(2), kSignal, kIdler, p.n_s);
  s = phase_shift(s, kSignal, phi);
  s = loss_channel(s, kSignal, p.kappa_s, p.background_env_nbar());
  s = loss_channel(s, kIdler, p.kappa_i, 0.0);
  return s;
}

ReceiverMoments qi_receiver_moments(const SystemParams& p, double phi) {
  GaussianStateXd s = qi_receiver_input(p, phi);
  s = scale_cross_correlation(s, kSignal, kIdler, std::sqrt(p.kappa_extra));
  s = parametric_amplifier(s, kIdler, kSignal, p.gain);
  s = loss_channel(s, kIdler, p.eta_d, 0.0);
  return {photon_mean(s, kIdler), photon_variance(s, kIdler)};
}

double electronics_noise_variance(const SystemParams& p) {
  return p.modes * p.eta_d * p.gain_minus_one() * p.n_el;
}

SnrReport qi_snr_exact(const SystemParams& p) {
  const ReceiverMoments on = qi_receiver_moments(p, 0.0);
  const ReceiverMoments off = qi_receiver_moments(p, std::numbers::pi);
  const double v_el = electronics_noise_variance(p);
  const double m = p.modes;
  const double diff = m * (on.mean - off.mean);
  const double noise = std::sqrt(m * on.variance + v_el) + std::sqrt(m * off.variance + v_el);

  SnrReport r;
  r.mean_on = on.mean;
  r.mean_off = off.mean;
  r.var_on = on.variance;
  r.var_off = off.variance;
  if (noise == 0.0) {
    if (diff == 0.0) throw ZeroDenominator("qi_snr_exact: zero signal and zero noise");
    r.snr_exact = std::numeric_limits<double>::infinity();
  } else {
    r.snr_exact = 4.0 * diff * diff / (noise * noise);
  }
  r.snr_asymptotic = qi_snr_asymptotic(p);
  const double ci = ci_snr_asymptotic(p);
  r.ratio_to_ci = ci > 0.0 ? r.snr_exact / ci : std::numeric_limits<double>::quiet_NaN();
  try {
    r.classic_margin_db = classicality_margin_db(p);
  } catch (const std::domain_error&) {
    r.classic_margin_db = std::numeric_limits<double>::quiet_NaN();
  }
  try {
    r.bg_to_return_db = background_to_return_db(p);
  } catch (const std::domain_error&) {
    r.bg_to_return_db = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double qi_snr_asymptotic(const SystemParams& p) {
  p.validate();
  const double num = 16.0 * p.kappa_i * p.kappa_s * p.kappa_extra * p.eta_d * p.modes * p.n_s;
  if (num == 0.0) return 0.0;
  return num / (p.n_b + p.n_el);
}

SnrReport ci_snr_exact(const SystemParams& p) {
  p.validate();
  // Coherent probe carrying n_s photons per mode, BPSK-modulated, returned
  // through the same lossy noisy channel and homodyned on the x quadrature.
  auto returned = [&](double phi) {
    GaussianStateXd s = coherent<double>(std::complex<double>(std::sqrt(p.n_s), 0.0));
    s = phase_shift(s, 0, phi);
    s = loss_channel(s, 0, p.kappa_s, p.background_env_nbar());
    return quadrature_stats(s, 0, 0.0);
  };
  const auto on = returned(0.0);
  const auto off = returned(std::numbers::pi);
  const double m = p.modes;
  const double diff = m * (on.mean - off.mean);
  const double noise = std::sqrt(m * on.variance) + std::sqrt(m * off.variance);

  SnrReport r;
  r.mean_on = on.mean;
  r.mean_off = off.mean;
  r.var_on = on.variance;
  r.var_off = off.variance;
  r.snr_exact = 4.0 * diff * diff / (noise * noise);
  r.snr_asymptotic = ci_snr_asymptotic(p);
  r.ratio_to_ci = r.snr_asymptotic > 0.0 ? r.snr_exact / r.snr_asymptotic : std::numeric_limits<double>::quiet_NaN();
  r.classic_margin_db = std::numeric_limits<double>::quiet_NaN();
  try {
    r.bg_to_return_db = background_to_return_db(p);
  } catch (const std::domain_error&) {
    r.bg_to_return_db = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double ci_snr_asymptotic(const SystemParams& p) {
  p.validate();
  const double num = 8.0 * p.kappa_s * p.modes * p.n_s;
  if (num == 0.0) return 0.0;
  return num / p.n_b;
}

double snr_advantage(const SystemParams& p) {
  const double ci = ci_snr_asymptotic(p);
  if (!(ci > 0.0)) throw std::domain_error("snr_advantage: classical SNR is zero");
  return qi_snr_exact(p).snr_exact / ci;
}

double classicality_margin_db(const SystemParams& p) {
  const GaussianStateXd s = qi_receiver_input(p, p.phi);
  const auto mom = mode_moments(s);
  const double pscc2 = std::norm(mom.pscc(kSignal, kIdler));
  if (pscc2 == 0.0) throw std::domain_error("classicality_margin_db: cross correlation vanishes");
  return db(mom.mean_photon(kSignal) * mom.mean_photon(kIdler) / pscc2);
}

double background_to_return_db(const SystemParams& p) {
  p.validate();
  const double ret = p.kappa_s * p.n_s;
  if (ret == 0.0) throw std::domain_error("background_to_return_db: no returned probe light");
  return db(p.n_b / ret);
}

}  // namespace qi
