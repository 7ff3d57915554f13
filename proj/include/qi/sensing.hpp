#ifndef QI_SENSING_HPP
#define QI_SENSING_HPP

// System models for quantum illumination (entangled source, parametric
// amplifier receiver) and for the optimum classical benchmark (coherent probe,
// homodyne receiver). Per-mode moments come from the Gaussian state calculus;
// the M independent mode pairs enter as a scalar multiplier.

#include "qi/gaussian_state.hpp"

#include <stdexcept>
#include <string>

namespace qi {

class ZeroDenominator : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct SystemParams {
  double n_s = 3e-4;          // source brightness, photons per mode
  double kappa_s = 0.038;     // roundtrip probe transmissivity
  double kappa_i = 1.0;       // idler storage transmissivity
  double kappa_extra = 0.8;   // lumped receiver nonideality
  double eta_d = 0.84;        // detector quantum efficiency
  double n_b = 95.0;          // background photons per mode at the receiver
  double n_el = 0.0;          // input-referred electronics noise, photons per mode
  double gain = 1.0 + 7.4e-5; // amplifier gain G
  double modes = 1e12;        // M, number of i.i.d. mode pairs
  double bandwidth = 0.0;     // W in Hz, 0 when unspecified
  double duration = 0.0;      // T in s, 0 when unspecified
  double phi = 0.0;           // modulation phase, radians

  /// Sets W and T and derives M = T W.
  SystemParams& set_bandwidth_time(double w, double t);

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;

  double gain_minus_one() const { return gain - 1.0; }
  /// Mean photon number of the thermal environment that injects n_b photons through the probe channel.
  double background_env_nbar() const;
};

struct ReceiverMoments {
  double mean = 0.0;      // detected photons per mode
  double variance = 0.0;  // per-mode photon-number variance
};

struct SnrReport {
  double snr_exact = 0.0;
  double snr_asymptotic = 0.0;
  double mean_on = 0.0;   // phi = 0
  double mean_off = 0.0;  // phi = pi
  double var_on = 0.0;
  double var_off = 0.0;
  double ratio_to_ci = 0.0;
  double classic_margin_db = 0.0;  // NaN when undefined
  double bg_to_return_db = 0.0;    // NaN when undefined
};

/// Gap of the amplifier receiver to the optimum joint measurement; reported
/// only, no such receiver is modeled.
inline constexpr double kOptimumReceiverGapDb = 3.0;

/// Two-mode state (0 = returned signal, 1 = stored idler) at the amplifier
/// input, before the kappa_extra correction.
GaussianStateXd qi_receiver_input(const SystemParams& p, double phi);

/// Full chain: source, modulation, probe channel, idler storage, kappa_extra,
/// amplifier and detector loss. Exact moments of the detected idler count.
ReceiverMoments qi_receiver_moments(const SystemParams& p, double phi);

/// Electronics-noise variance M eta_D (G-1) N_el added to the aggregate count.
double electronics_noise_variance(const SystemParams& p);

SnrReport qi_snr_exact(const SystemParams& p);
double qi_snr_asymptotic(const SystemParams& p);

SnrReport ci_snr_exact(const SystemParams& p);
double ci_snr_asymptotic(const SystemParams& p);

/// Exact QI SNR over the classical asymptote at equal probe energy.
double snr_advantage(const SystemParams& p);

/// 10 log10(<n_S><n_I> / |<a_S a_I>|^2) at the amplifier input; positive
/// means the returned and stored light admit a classical description.
double classicality_margin_db(const SystemParams& p);

/// 10 log10(N_B / (kappa_S N_S)).
double background_to_return_db(const SystemParams& p);

}  // namespace qi

#endif  // QI_SENSING_HPP
