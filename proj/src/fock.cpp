#include "qi/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qi {

namespace {

std::vector<std::size_t> make_strides(const std::vector<int>& dims) {
  std::vector<std::size_t> strides(dims.size());
  std::size_t s = 1;
  for (std::size_t m = dims.size(); m-- > 0;) {
    strides[m] = s;
    s *= static_cast<std::size_t>(dims[m]);
  }
  return strides;
}

std::size_t total_size(const std::vector<int>& dims) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("FockArray: every mode needs at least one level");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

// Enumerates base offsets of all index combinations with modes a and b pinned
// at zero.
std::vector<std::size_t> rest_offsets(const std::vector<int>& dims, const std::vector<std::size_t>& strides,
                                      int a, int b) {
  std::vector<std::size_t> out{0};
  for (int m = 0; m < static_cast<int>(dims.size()); ++m) {
    if (m == a || m == b) continue;
    std::vector<std::size_t> next;
    next.reserve(out.size() * static_cast<std::size_t>(dims[static_cast<std::size_t>(m)]));
    for (std::size_t base : out)
      for (int n = 0; n < dims[static_cast<std::size_t>(m)]; ++n)
        next.push_back(base + static_cast<std::size_t>(n) * strides[static_cast<std::size_t>(m)]);
    out = std::move(next);
  }
  return out;
}

// One conserved sector of a two-mode gate: the in-range basis states are
// (start_a + i*step_a, start_b + i) for i in [0, len), and `unitary` is the
// in-range block of the sector propagator.
using detail::Sector;

// Beam splitter, generator theta (a^dag b - b^dag a), cos theta = sqrt(k).
// Sector t = n_a + n_b is finite, so its exponential is exact; states with
// n_a >= dim_a or n_b >= dim_b are simply dropped afterwards.
std::vector<Sector> beam_splitter_sectors(int dim_a, int dim_b, double transmissivity) {
  const double theta = std::acos(std::sqrt(std::clamp(transmissivity, 0.0, 1.0)));
  std::vector<Sector> sectors;
  for (int t = 0; t <= dim_a + dim_b - 2; ++t) {
    // Sector basis indexed by n_a = 0..t with n_b = t - n_a.
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(t + 1, t + 1);
    for (int n = 0; n < t; ++n) {
      const double c = theta * std::sqrt(static_cast<double>(n + 1) * static_cast<double>(t - n));
      gen(n + 1, n) = c;
      gen(n, n + 1) = -c;
    }
    const Eigen::MatrixXd u = gen.exp();
    const int lo = std::max(0, t - dim_b + 1);
    const int hi = std::min(t, dim_a - 1);
    if (hi < lo) continue;
    // Basis index in terms of n_b decreasing; reorder so that i runs with n_b.
    const int len = hi - lo + 1;
    Eigen::MatrixXcd block(len, len);
    for (int r = 0; r < len; ++r)
      for (int c = 0; c < len; ++c) block(r, c) = u(hi - r, hi - c);
    sectors.push_back({hi, t - hi, len, std::move(block)});
  }
  return sectors;
}

// Two-mode squeezer, generator r (a^dag b^dag - a b). Sector d = n_a - n_b is
// infinite; the propagator is computed on an extended ladder and restricted
// to the in-range block, so amplitude that would leave the truncation is lost.
std::vector<Sector> squeezer_sectors(int dim_a, int dim_b, double mean_photon) {
  const double r = std::asinh(std::sqrt(mean_photon));
  std::vector<Sector> sectors;
  const int pad = std::max(dim_a, dim_b) + 20;
  for (int d = -(dim_b - 1); d <= dim_a - 1; ++d) {
    const int start_b = std::max(0, -d);
    const int start_a = start_b + d;
    const int len = std::min(dim_a - start_a, dim_b - start_b);
    if (len <= 0) continue;
    const int ext = len + pad;
    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(ext, ext);
    for (int i = 0; i + 1 < ext; ++i) {
      const double na = start_a + i, nb = start_b + i;
      const double c = r * std::sqrt((na + 1.0) * (nb + 1.0));
      gen(i + 1, i) = c;
      gen(i, i + 1) = -c;
    }
    const Eigen::MatrixXd u = gen.exp();
    sectors.push_back({start_a, start_b, len, u.topLeftCorner(len, len).cast<std::complex<double>>()});
  }
  return sectors;
}

}  // namespace

FockArray::FockArray(std::vector<int> mode_dims, const std::vector<int>& occupations)
    : dims_(std::move(mode_dims)), strides_(make_strides(dims_)) {
  amps_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total_size(dims_)));
  amps_(static_cast<Eigen::Index>(index(occupations))) = 1.0;
}

FockArray::FockArray(std::vector<int> mode_dims, Eigen::VectorXcd amplitudes)
    : dims_(std::move(mode_dims)), strides_(make_strides(dims_)), amps_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amps_.size()) != total_size(dims_))
    throw std::invalid_argument("FockArray: amplitude count does not match mode dimensions");
}

std::size_t FockArray::index(const std::vector<int>& occupations) const {
  if (occupations.size() != dims_.size())
    throw std::invalid_argument("FockArray: occupation vector has wrong length");
  std::size_t idx = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (occupations[m] < 0 || occupations[m] >= dims_[m])
      throw std::out_of_range("FockArray: occupation outside truncation");
    idx += static_cast<std::size_t>(occupations[m]) * strides_[m];
  }
  return idx;
}

FockArray tensor(const FockArray& a, const FockArray& b) {
  std::vector<int> dims = a.mode_dims();
  dims.insert(dims.end(), b.mode_dims().begin(), b.mode_dims().end());
  Eigen::VectorXcd amps(a.amplitudes().size() * b.amplitudes().size());
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i)
    amps.segment(i * b.amplitudes().size(), b.amplitudes().size()) = a.amplitudes()(i) * b.amplitudes();
  return FockArray(std::move(dims), std::move(amps));
}

FockArray fock_tmss(double mean_photon, int dim) {
  if (!(mean_photon >= 0.0)) throw std::invalid_argument("fock_tmss: mean photon number must be non-negative");
  if (dim < 2) throw std::invalid_argument("fock_tmss: truncation must be at least 2");
  FockArray out({dim, dim}, std::vector<int>{0, 0});
  out.amplitudes().setZero();
  const double ratio = mean_photon / (mean_photon + 1.0);
  double p = 1.0 / (mean_photon + 1.0);
  for (int n = 0; n < dim; ++n) {
    out.amplitudes()(static_cast<Eigen::Index>(out.index({n, n}))) = std::sqrt(p);
    p *= ratio;
  }
  return out;
}

QuadraticPropagator::QuadraticPropagator(const std::vector<int>& mode_dims, const QuadraticGate& gate)
    : gate_(gate), dims_(mode_dims) {
  const int n = static_cast<int>(dims_.size());
  if (gate.mode_a < 0 || gate.mode_a >= n) throw std::out_of_range("QuadraticPropagator: mode index out of range");
  if (gate.kind == QuadraticKind::Phase) return;
  if (gate.mode_b < 0 || gate.mode_b >= n) throw std::out_of_range("QuadraticPropagator: mode index out of range");
  if (gate.mode_a == gate.mode_b) throw std::invalid_argument("QuadraticPropagator: modes must be distinct");

  const int dim_a = dims_[static_cast<std::size_t>(gate.mode_a)];
  const int dim_b = dims_[static_cast<std::size_t>(gate.mode_b)];
  if (gate.kind == QuadraticKind::BeamSplitter) {
    if (!(gate.parameter >= 0.0 && gate.parameter <= 1.0))
      throw std::invalid_argument("QuadraticPropagator: transmissivity must lie in [0, 1]");
    sectors_ = beam_splitter_sectors(dim_a, dim_b, gate.parameter);
    step_a_ = -1;
  } else {
    if (!(gate.parameter >= 0.0))
      throw std::invalid_argument("QuadraticPropagator: squeezing photon number must be non-negative");
    sectors_ = squeezer_sectors(dim_a, dim_b, gate.parameter);
    step_a_ = 1;
  }
}

FockArray QuadraticPropagator::apply(const FockArray& state, double leakage_bound) const {
  if (state.mode_dims() != dims_) throw std::invalid_argument("QuadraticPropagator: state dimensions do not match");
  const auto& dims = state.mode_dims();
  const int n = state.n_modes();

  if (gate_.kind == QuadraticKind::Phase) {
    FockArray out = state;
    const std::size_t stride = state.stride(gate_.mode_a);
    const int dim = dims[static_cast<std::size_t>(gate_.mode_a)];
    std::vector<std::complex<double>> factor(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) factor[static_cast<std::size_t>(k)] = std::polar(1.0, gate_.parameter * k);
    for (Eigen::Index i = 0; i < out.amplitudes().size(); ++i)
      out.amplitudes()(i) *= factor[(static_cast<std::size_t>(i) / stride) % static_cast<std::size_t>(dim)];
    return out;
  }

  const std::size_t sa = state.stride(gate_.mode_a), sb = state.stride(gate_.mode_b);
  std::vector<std::size_t> strides(dims.size());
  for (int m = 0; m < n; ++m) strides[static_cast<std::size_t>(m)] = state.stride(m);
  const auto rests = rest_offsets(dims, strides, gate_.mode_a, gate_.mode_b);

  const Eigen::VectorXcd& in = state.amplitudes();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(in.size());
  Eigen::VectorXcd buf, res;
  std::vector<std::size_t> offsets;
  for (const Sector& sec : sectors_) {
    buf.resize(sec.len);
    offsets.resize(static_cast<std::size_t>(sec.len));
    for (int i = 0; i < sec.len; ++i)
      offsets[static_cast<std::size_t>(i)] = static_cast<std::size_t>(sec.start_a + step_a_ * i) * sa +
                                             static_cast<std::size_t>(sec.start_b + i) * sb;
    for (std::size_t base : rests) {
      bool any = false;
      for (int i = 0; i < sec.len; ++i) {
        buf(i) = in(static_cast<Eigen::Index>(base + offsets[static_cast<std::size_t>(i)]));
        any = any || buf(i) != std::complex<double>(0.0, 0.0);
      }
      if (!any) continue;
      res.noalias() = sec.unitary * buf;
      for (int i = 0; i < sec.len; ++i) out(static_cast<Eigen::Index>(base + offsets[static_cast<std::size_t>(i)])) = res(i);
    }
  }

  const double leaked = in.squaredNorm() - out.squaredNorm();
  if (leaked > leakage_bound)
    throw TruncationOverflow("apply_quadratic_unitary: truncation leakage " + std::to_string(leaked) +
                                 " exceeds bound; increase the mode dimensions",
                             leaked);
  return FockArray(dims, std::move(out));
}

FockArray apply_quadratic_unitary(const FockArray& state, const QuadraticGate& gate, double leakage_bound) {
  return QuadraticPropagator(state.mode_dims(), gate).apply(state, leakage_bound);
}

FockPhotonStats photon_stats_from_distribution(std::vector<double> distribution) {
  FockPhotonStats s;
  const double total = std::accumulate(distribution.begin(), distribution.end(), 0.0);
  if (total <= 0.0) throw std::invalid_argument("photon_stats_from_distribution: empty distribution");
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < distribution.size(); ++k) {
    const double w = distribution[k] / total, kd = static_cast<double>(k);
    m1 += w * kd;
    m2 += w * kd * kd;
  }
  s.mean = m1;
  s.variance = m2 - m1 * m1;
  s.distribution = std::move(distribution);
  return s;
}

FockPhotonStats fock_photon_stats(const FockArray& state, int mode) {
  if (mode < 0 || mode >= state.n_modes()) throw std::out_of_range("fock_photon_stats: mode index out of range");
  const int dim = state.mode_dims()[static_cast<std::size_t>(mode)];
  const std::size_t stride = state.stride(mode);
  std::vector<double> dist(static_cast<std::size_t>(dim), 0.0);
  const auto& a = state.amplitudes();
  const Eigen::Index inner = static_cast<Eigen::Index>(stride);
  const Eigen::Index outer = a.size() / (inner * dim);
  for (Eigen::Index o = 0; o < outer; ++o)
    for (int k = 0; k < dim; ++k)
      dist[static_cast<std::size_t>(k)] += a.segment((o * dim + k) * inner, inner).squaredNorm();
  return photon_stats_from_distribution(std::move(dist));
}

std::vector<double> binomial_thinning(const std::vector<double>& distribution, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("binomial_thinning: eta must lie in [0, 1]");
  std::vector<double> out(distribution.size(), 0.0);
  for (std::size_t n = 0; n < distribution.size(); ++n) {
    if (distribution[n] == 0.0) continue;
    for (std::size_t k = 0; k <= n; ++k) {
      const double logc = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                          std::lgamma(static_cast<double>(n - k) + 1.0);
      const double pk = (k == 0 ? 1.0 : std::pow(eta, static_cast<double>(k))) *
                        (n == k ? 1.0 : std::pow(1.0 - eta, static_cast<double>(n - k)));
      out[k] += distribution[n] * std::exp(logc) * pk;
    }
  }
  return out;
}

FockArray project_mode(const FockArray& state, int mode, int level) {
  if (mode < 0 || mode >= state.n_modes()) throw std::out_of_range("project_mode: mode index out of range");
  const int dim = state.mode_dims()[static_cast<std::size_t>(mode)];
  if (level < 0 || level >= dim) throw std::out_of_range("project_mode: level outside truncation");
  if (state.n_modes() == 1) throw std::invalid_argument("project_mode: cannot remove the only mode");
  std::vector<int> dims = state.mode_dims();
  dims.erase(dims.begin() + mode);
  const std::size_t inner = state.stride(mode);
  const std::size_t outer = static_cast<std::size_t>(state.amplitudes().size()) / (inner * static_cast<std::size_t>(dim));
  Eigen::VectorXcd amps(static_cast<Eigen::Index>(outer * inner));
  for (std::size_t o = 0; o < outer; ++o)
    amps.segment(static_cast<Eigen::Index>(o * inner), static_cast<Eigen::Index>(inner)) =
        state.amplitudes().segment(
            static_cast<Eigen::Index>((o * static_cast<std::size_t>(dim) + static_cast<std::size_t>(level)) * inner),
            static_cast<Eigen::Index>(inner));
  return FockArray(std::move(dims), std::move(amps));
}

OracleChainResult fock_receiver_chain(const OracleChainParams& p, const OracleChainOptions& opt) {
  if (!(p.kappa_s >= 0.0 && p.kappa_s < 1.0) && !(p.kappa_s == 1.0 && p.n_b == 0.0))
    throw std::invalid_argument("fock_receiver_chain: kappa_s must lie in [0, 1) when background is present");
  if (!(p.kappa_i >= 0.0 && p.kappa_i <= 1.0)) throw std::invalid_argument("fock_receiver_chain: kappa_i must lie in [0, 1]");
  if (p.n_b < 0.0 || p.n_s < 0.0) throw std::invalid_argument("fock_receiver_chain: photon numbers must be non-negative");
  if (p.gain < 1.0) throw std::invalid_argument("fock_receiver_chain: gain must be >= 1");
  if (opt.truncation < 2) throw std::invalid_argument("fock_receiver_chain: truncation must be at least 2");

  const double env_nbar = p.n_b > 0.0 ? p.n_b / (1.0 - p.kappa_s) : 0.0;
  // Thermal weights w_m = env^m / (env+1)^(m+1), truncated once the tail is negligible.
  std::vector<double> weights;
  double dropped = 0.0;
  {
    const double ratio = env_nbar / (env_nbar + 1.0);
    double w = 1.0 / (env_nbar + 1.0), tail = 1.0;
    while (true) {
      weights.push_back(w);
      tail -= w;
      if (tail <= opt.tail_tolerance || ratio == 0.0) break;
      w *= ratio;
    }
    dropped = std::max(tail, 0.0);
  }
  const int m_max = static_cast<int>(weights.size()) - 1;
  const int d = opt.truncation;
  // Signal and background exchange photons at the loss beam splitter, so both
  // hold the largest thermal occupation plus the truncated pair photons.
  const int big = m_max + d;

  // Idler loss and phase act on (signal, idler, idler-loss vacuum).
  FockArray siv = tensor(fock_tmss(p.n_s, d), FockArray({d}, std::vector<int>{0}));
  siv = QuadraticPropagator({d, d, d}, {QuadraticKind::BeamSplitter, 1, 2, p.kappa_i}).apply(siv, opt.leakage_bound);
  siv = QuadraticPropagator({d, d, d}, {QuadraticKind::Phase, 0, 0, p.phi}).apply(siv, opt.leakage_bound);

  // The loss environments are never touched again, so measuring them in the
  // Fock basis is an exact partial trace. Each idler-loss outcome is
  // propagated as its own unnormalized branch; outcomes are taken in order
  // until the remaining probability is below the tail tolerance.
  std::vector<FockArray> branches;
  double remaining = siv.norm();
  for (int k = 0; k < d && remaining > opt.tail_tolerance; ++k) {
    FockArray br = project_mode(siv, 2, k);
    remaining -= br.norm();
    if (br.norm() > 0.0) branches.push_back(std::move(br));
  }
  dropped += std::max(remaining, 0.0);

  const QuadraticPropagator signal_loss({big, big}, {QuadraticKind::BeamSplitter, 0, 1, p.kappa_s});
  // Background kept as a spectator mode: (background, signal, idler).
  const std::vector<int> amp_dims{big, big, d};
  const QuadraticPropagator amplifier(amp_dims, {QuadraticKind::TwoModeSqueezer, 2, 1, p.gain - 1.0});

  std::vector<double> idler_dist(static_cast<std::size_t>(d), 0.0);
  OracleChainResult result;
  result.thermal_components = m_max + 1;
  result.loss_branches = static_cast<int>(branches.size());
  result.dropped_weight = dropped;
  const Eigen::Index plane = static_cast<Eigen::Index>(big) * d;
  for (int m = 0; m <= m_max; ++m) {
    // Beam-splitter image of |s>_S |m>_B for every signal level s.
    std::vector<FockArray> response;
    response.reserve(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s)
      response.push_back(signal_loss.apply(FockArray({big, big}, std::vector<int>{s, m}), opt.leakage_bound));
    const double w = weights[static_cast<std::size_t>(m)];

    for (const FockArray& br : branches) {
      const Eigen::VectorXcd& psi = br.amplitudes();
      Eigen::VectorXcd chi = Eigen::VectorXcd::Zero(plane * big);
      for (int s = 0; s < d; ++s) {
        const Eigen::VectorXcd& resp = response[static_cast<std::size_t>(s)].amplitudes();
        for (int ni = 0; ni < d; ++ni) {
          const std::complex<double> a = psi(s * d + ni);
          if (a == std::complex<double>(0.0, 0.0)) continue;
          // The beam splitter conserves n_S + n_B.
          for (int kb = std::max(0, s + m - big + 1); kb <= std::min(big - 1, s + m); ++kb) {
            const int ns = s + m - kb;
            chi(kb * plane + static_cast<Eigen::Index>(ns) * d + ni) += a * resp(static_cast<Eigen::Index>(ns) * big + kb);
          }
        }
      }
      const FockArray in(amp_dims, std::move(chi));
      const FockArray out = amplifier.apply(in, opt.leakage_bound);
      result.max_leakage = std::max(result.max_leakage, in.norm() - out.norm());
      const FockPhotonStats st = fock_photon_stats(out, 2);
      for (std::size_t k = 0; k < st.distribution.size(); ++k) idler_dist[k] += w * st.distribution[k];
    }
  }
  if (p.eta_d < 1.0) idler_dist = binomial_thinning(idler_dist, p.eta_d);
  result.idler = photon_stats_from_distribution(std::move(idler_dist));
  return result;
}

}  // namespace qi
