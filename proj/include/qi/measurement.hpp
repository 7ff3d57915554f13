#ifndef QI_MEASUREMENT_HPP
#define QI_MEASUREMENT_HPP

// Synthetic acquisition: BPSK-modulated detector traces, spectral-peak SNR
// estimation, intensity-modulation-amplitude histograms and repeated runs.
//
// A trace spans the M mode pairs of its SystemParams, spread evenly over its
// samples. Each sample aggregates many modes, so it is drawn as a Gaussian
// variate with the exact per-mode mean and variance scaled by the number of
// modes in the sample (plus the electronics-noise share).

#include "qi/sensing.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qi {

enum class Scheme { QuantumIllumination, ClassicalIllumination };

struct TraceOptions {
  Scheme scheme = Scheme::QuantumIllumination;
  bool noiseless = false;  // diagnostic: variance forced to zero
};

struct TraceRecord {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;
  double bpsk_rate = 0.0;
  double duration = 0.0;
  std::uint64_t seed = 0;
  SystemParams params;
  Scheme scheme = Scheme::QuantumIllumination;

  /// Modulation phase index at sample n: 0 for phi = 0, 1 for phi = pi.
  int phase_index(Eigen::Index n) const;
};

TraceRecord simulate_trace(const SystemParams& p, double sample_rate, double bpsk_rate, double duration,
                           std::uint64_t seed, const TraceOptions& opt = {});

enum class Window { Rectangular, Hann };

struct SpaResult {
  double peak_amplitude = 0.0;       // fundamental amplitude at the modulation frequency, trace units
  double noise_floor_density = 0.0;  // one-sided amplitude density, trace units per sqrt(Hz)
  double resolution_bandwidth = 0.0; // Hz
  double estimated_snr = 0.0;
  int n_repeats = 1;
  double std = 0.0;                  // spread of estimated_snr over repeats
  double peak_ratio = 0.0;           // peak-bin power over mean noise-bin power (uncorrected)
  int segments = 0;                  // spectra averaged
  int noise_bins = 0;                // independent noise-bin powers averaged (bins x segments)
};

/// JSON object with every SpaResult field.
std::string to_json_string(const SpaResult& r);

struct SpectralOptions {
  Window window = Window::Rectangular;
  int noise_bins_per_side = 32;
};

/// Estimates the SNR from the spectral line at `target_freq`.
///
/// The trace is cut into segments of length sample_rate / rbw, windowed, and
/// the bin powers are averaged over segments. The noise power P is the mean of
/// the neighbouring bins (excluding harmonics of the modulation), the ratio
/// r = ((K-1)/K) P_peak / P - 1 is the unbiased signal-to-noise power ratio
/// for K averaged noise bins, and
///
///   estimated_snr = 8 N sum(w^2) / sum(w)^2 * max(r, 0),
///
/// which converges to (8 / pi^2) times the two-phase SNR of the aggregate count:
/// a square wave puts 8/pi^2 of its power in the fundamental.
SpaResult spectral_peak_snr(const TraceRecord& trace, double target_freq, double rbw,
                            const SpectralOptions& opt = {});

/// Probability that the peak-bin power ratio reaches `peak_ratio` when no line
/// is present. Under that hypothesis the ratio is F-distributed with
/// (2 segments, 2 noise_bins) degrees of freedom.
double no_line_tail_probability(double peak_ratio, int segments, int noise_bins);

struct ImaHistogram {
  std::vector<double> amplitudes;  // per-cycle demodulated amplitudes
  std::vector<double> edges;       // bins + 1 entries
  std::vector<int> counts;
  double max_ima = 0.0;
};

/// Per-cycle amplitudes mean(phi = 0 half) - mean(phi = pi half) over every
/// complete modulation cycle of every trace.
ImaHistogram ima_histogram(const std::vector<TraceRecord>& traces, int bins);

struct AcquisitionConfig {
  double sample_rate = 1e5;
  double bpsk_rate = 500.0;
  double duration = 1.024;
  double rbw = 0.9765625;
  std::uint64_t seed = 1;
  TraceOptions trace;
  SpectralOptions spectral;
};

/// Runs acquisition and spectral estimation n_repeats times with the source
/// brightness jittered uniformly within +-power_jitter. Repeat i uses its own
/// seed derived from (config.seed, i).
SpaResult repeat_protocol(const SystemParams& p, const AcquisitionConfig& config, int n_repeats = 5,
                          double power_jitter = 0.03);

void write_trace_csv(std::ostream& os, const TraceRecord& trace);

}  // namespace qi

#endif  // QI_MEASUREMENT_HPP
