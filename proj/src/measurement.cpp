#include "qi/measurement.hpp"

#include <unsupported/Eigen/FFT>

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace qi {

namespace {

struct PhaseMoments {
  double mean[2];
  double variance[2];
};

PhaseMoments per_mode_moments(const SystemParams& p, Scheme scheme) {
  PhaseMoments m{};
  if (scheme == Scheme::QuantumIllumination) {
    const ReceiverMoments on = qi_receiver_moments(p, 0.0);
    const ReceiverMoments off = qi_receiver_moments(p, std::numbers::pi);
    m.mean[0] = on.mean;
    m.mean[1] = off.mean;
    m.variance[0] = on.variance;
    m.variance[1] = off.variance;
  } else {
    const SnrReport ci = ci_snr_exact(p);
    m.mean[0] = ci.mean_on;
    m.mean[1] = ci.mean_off;
    m.variance[0] = ci.var_on;
    m.variance[1] = ci.var_off;
  }
  return m;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Continued fraction for the regularized incomplete beta function.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

double regularized_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(lbt) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(lbt) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

}  // namespace

int TraceRecord::phase_index(Eigen::Index n) const {
  const double cycles = (static_cast<double>(n) * bpsk_rate) / sample_rate;
  return (cycles - std::floor(cycles)) < 0.5 ? 0 : 1;
}

TraceRecord simulate_trace(const SystemParams& p, double sample_rate, double bpsk_rate, double duration,
                           std::uint64_t seed, const TraceOptions& opt) {
  p.validate();
  if (!(duration > 0.0)) throw std::invalid_argument("simulate_trace: duration must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("simulate_trace: sample rate must be positive");
  if (!(bpsk_rate > 0.0) || !(bpsk_rate < sample_rate / 2.0))
    throw std::invalid_argument("simulate_trace: modulation rate violates the Nyquist limit");
  if (duration * bpsk_rate < 10.0)
    throw std::invalid_argument("simulate_trace: trace must span at least 10 modulation cycles");

  TraceRecord t;
  t.sample_rate = sample_rate;
  t.bpsk_rate = bpsk_rate;
  t.duration = duration;
  t.seed = seed;
  t.params = p;
  t.scheme = opt.scheme;
  const auto n = static_cast<Eigen::Index>(std::llround(duration * sample_rate));
  t.samples.resize(n);

  const PhaseMoments m = per_mode_moments(p, opt.scheme);
  const double modes_per_sample = p.modes / static_cast<double>(n);
  const double el_per_sample =
      opt.scheme == Scheme::QuantumIllumination ? electronics_noise_variance(p) / static_cast<double>(n) : 0.0;
  double mu[2], sigma[2];
  for (int k = 0; k < 2; ++k) {
    mu[k] = modes_per_sample * m.mean[k];
    sigma[k] = opt.noiseless ? 0.0 : std::sqrt(modes_per_sample * m.variance[k] + el_per_sample);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = t.phase_index(i);
    const double z = normal(rng);
    t.samples(i) = mu[k] + sigma[k] * z;
  }
  return t;
}

double no_line_tail_probability(double peak_ratio, int segments, int noise_bins) {
  if (segments < 1 || noise_bins < 1) throw std::invalid_argument("no_line_tail_probability: counts must be positive");
  if (peak_ratio <= 0.0) return 1.0;
  const double a = segments, b = noise_bins;
  return regularized_beta(b, a, b / (b + a * peak_ratio));
}

SpaResult spectral_peak_snr(const TraceRecord& trace, double target_freq, double rbw, const SpectralOptions& opt) {
  const Eigen::Index n = trace.samples.size();
  if (n == 0 || trace.samples.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("spectral_peak_snr: trace is empty or all zero");
  if (!(rbw > 0.0)) throw std::invalid_argument("spectral_peak_snr: resolution bandwidth must be positive");
  const auto seg_len = static_cast<Eigen::Index>(std::llround(trace.sample_rate / rbw));
  if (seg_len < 8 || seg_len > n)
    throw std::invalid_argument("spectral_peak_snr: resolution bandwidth not reachable with this trace duration");
  const double bin_width = trace.sample_rate / static_cast<double>(seg_len);
  const auto peak = static_cast<Eigen::Index>(std::llround(target_freq / bin_width));
  const int guard = opt.window == Window::Hann ? 1 : 0;
  if (peak <= guard + 1 || peak + guard + 1 >= seg_len / 2)
    throw std::invalid_argument("spectral_peak_snr: target frequency not resolvable at this resolution bandwidth");

  Eigen::VectorXd w(seg_len);
  for (Eigen::Index i = 0; i < seg_len; ++i)
    w(i) = opt.window == Window::Hann
               ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg_len))
               : 1.0;
  const double sum_w = w.sum(), sum_w2 = w.squaredNorm();

  // Noise bins walk outward from the peak, skipping DC and every harmonic neighbourhood.
  auto excluded = [&](Eigen::Index b) {
    if (b <= guard) return true;
    const Eigen::Index h = (b + peak / 2) / peak;
    return h >= 1 && std::abs(b - h * peak) <= guard;
  };
  std::vector<Eigen::Index> noise;
  for (int side : {-1, 1}) {
    int taken = 0;
    for (Eigen::Index off = 1; taken < opt.noise_bins_per_side; ++off) {
      const Eigen::Index b = peak + side * off;
      if (b < 1 || b >= seg_len / 2) break;
      if (excluded(b)) continue;
      noise.push_back(b);
      ++taken;
    }
  }
  if (noise.size() < 2) throw std::invalid_argument("spectral_peak_snr: not enough noise bins");

  const Eigen::Index segments = n / seg_len;
  Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<std::size_t>(seg_len));
  std::vector<std::complex<double>> spec;
  double peak_power = 0.0, noise_power = 0.0;
  for (Eigen::Index s = 0; s < segments; ++s) {
    const auto seg = trace.samples.segment(s * seg_len, seg_len);
    const double mean = seg.mean();
    for (Eigen::Index i = 0; i < seg_len; ++i) buf[static_cast<std::size_t>(i)] = (seg(i) - mean) * w(i);
    fft.fwd(spec, buf);
    peak_power += std::norm(spec[static_cast<std::size_t>(peak)]);
    for (Eigen::Index b : noise) noise_power += std::norm(spec[static_cast<std::size_t>(b)]);
  }
  peak_power /= static_cast<double>(segments);
  noise_power /= static_cast<double>(segments * static_cast<Eigen::Index>(noise.size()));

  SpaResult r;
  r.segments = static_cast<int>(segments);
  r.noise_bins = static_cast<int>(segments * static_cast<Eigen::Index>(noise.size()));
  r.resolution_bandwidth = bin_width;
  r.peak_amplitude = 2.0 * std::sqrt(peak_power) / sum_w;
  const double sample_variance = noise_power / sum_w2;
  r.noise_floor_density = std::sqrt(2.0 * sample_variance / trace.sample_rate);
  if (noise_power > 0.0) {
    const double k = r.noise_bins;
    r.peak_ratio = peak_power / noise_power;
    const double ratio = (k - 1.0) / k * r.peak_ratio - 1.0;
    r.estimated_snr = 8.0 * static_cast<double>(segments * seg_len) * sum_w2 / (sum_w * sum_w) * std::max(ratio, 0.0);
  } else {
    r.peak_ratio = std::numeric_limits<double>::infinity();
    r.estimated_snr = std::numeric_limits<double>::infinity();
  }
  return r;
}

ImaHistogram ima_histogram(const std::vector<TraceRecord>& traces, int bins) {
  if (traces.empty()) throw std::invalid_argument("ima_histogram: no traces");
  if (bins < 1) throw std::invalid_argument("ima_histogram: bin count must be positive");
  ImaHistogram h;
  for (const TraceRecord& t : traces) {
    const Eigen::Index n = t.samples.size();
    double sum[2] = {0.0, 0.0};
    int count[2] = {0, 0};
    long current = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const long cycle = static_cast<long>(std::floor((static_cast<double>(i) * t.bpsk_rate) / t.sample_rate));
      if (cycle != current) {
        if (count[0] > 0 && count[1] > 0) h.amplitudes.push_back(sum[0] / count[0] - sum[1] / count[1]);
        sum[0] = sum[1] = 0.0;
        count[0] = count[1] = 0;
        current = cycle;
      }
      const int k = t.phase_index(i);
      sum[k] += t.samples(i);
      ++count[k];
    }
    // The trailing cycle counts only when it is complete.
    const double cycles = static_cast<double>(n) * t.bpsk_rate / t.sample_rate;
    if (std::abs(cycles - std::round(cycles)) < 1e-9 && count[0] > 0 && count[1] > 0)
      h.amplitudes.push_back(sum[0] / count[0] - sum[1] / count[1]);
  }
  if (h.amplitudes.empty()) throw std::invalid_argument("ima_histogram: no complete modulation cycle");

  const auto [lo_it, hi_it] = std::minmax_element(h.amplitudes.begin(), h.amplitudes.end());
  const double lo = *lo_it, hi = *hi_it;
  h.max_ima = hi;
  if (hi == lo) {
    h.edges = {lo, hi};
    h.counts = {static_cast<int>(h.amplitudes.size())};
    return h;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double a : h.amplitudes) {
    auto b = static_cast<int>((a - lo) / (hi - lo) * bins);
    ++h.counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }
  return h;
}

SpaResult repeat_protocol(const SystemParams& p, const AcquisitionConfig& config, int n_repeats, double power_jitter) {
  if (n_repeats < 2) throw std::invalid_argument("repeat_protocol: at least two repeats are required");
  if (!(power_jitter >= 0.0 && power_jitter < 1.0))
    throw std::invalid_argument("repeat_protocol: power jitter must lie in [0, 1)");
  std::vector<double> snrs, peaks;
  SpaResult last;
  for (int i = 0; i < n_repeats; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed & 0xffffffffu), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    SystemParams q = p;
    if (power_jitter > 0.0) q.n_s = p.n_s * (1.0 + std::uniform_real_distribution<double>(-power_jitter, power_jitter)(rng));
    const std::uint64_t trace_seed = rng();
    const TraceRecord t = simulate_trace(q, config.sample_rate, config.bpsk_rate, config.duration, trace_seed, config.trace);
    last = spectral_peak_snr(t, config.bpsk_rate, config.rbw, config.spectral);
    snrs.push_back(last.estimated_snr);
    peaks.push_back(last.peak_amplitude);
  }
  auto mean = [](const std::vector<double>& v) {
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return v.front();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  SpaResult r = last;
  r.estimated_snr = mean(snrs);
  r.peak_amplitude = mean(peaks);
  r.std = sample_std(snrs);
  r.n_repeats = n_repeats;
  return r;
}

std::string to_json_string(const SpaResult& r) {
  nlohmann::json j;
  j["peak_amplitude"] = r.peak_amplitude;
  j["noise_floor_density"] = r.noise_floor_density;
  j["resolution_bandwidth"] = r.resolution_bandwidth;
  j["estimated_snr"] = r.estimated_snr;
  j["n_repeats"] = r.n_repeats;
  j["std"] = r.std;
  j["peak_ratio"] = r.peak_ratio;
  j["segments"] = r.segments;
  j["noise_bins"] = r.noise_bins;
  return j.dump(2);
}

void write_trace_csv(std::ostream& os, const TraceRecord& trace) {
  os.precision(17);
  os << "time_s,value\n";
  for (Eigen::Index i = 0; i < trace.samples.size(); ++i)
    os << static_cast<double>(i) / trace.sample_rate << ',' << trace.samples(i) << '\n';
}

}  // namespace qi
