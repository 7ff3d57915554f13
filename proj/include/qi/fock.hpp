#ifndef QI_FOCK_HPP
#define QI_FOCK_HPP

// Brute-force truncated Fock-space simulator for pure multimode states. Used
// as an independent oracle for the Gaussian moment calculus.
//
// Amplitudes are stored row-major over modes: the last mode varies fastest.
// Quadratic unitaries are applied sector by sector (beam splitters conserve
// n_j + n_k, two-mode squeezers conserve n_j - n_k), with the exact matrix
// exponential of the generator on each sector. Population pushed above the
// truncation is discarded and accounted for in norm_deficit().

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qi {

class TruncationOverflow : public std::runtime_error {
 public:
  TruncationOverflow(const std::string& what, double leaked)
      : std::runtime_error(what), leaked_(leaked) {}
  double leaked() const { return leaked_; }

 private:
  double leaked_;
};

class FockArray {
 public:
  using Complex = std::complex<double>;

  /// Basis state |occupations>.
  FockArray(std::vector<int> mode_dims, const std::vector<int>& occupations);
  FockArray(std::vector<int> mode_dims, Eigen::VectorXcd amplitudes);

  int n_modes() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& mode_dims() const { return dims_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }

  double norm() const { return amps_.squaredNorm(); }
  double norm_deficit() const { return 1.0 - norm(); }

  std::size_t stride(int mode) const { return strides_[static_cast<std::size_t>(mode)]; }
  std::size_t index(const std::vector<int>& occupations) const;
  Complex amplitude(const std::vector<int>& occupations) const { return amps_(static_cast<Eigen::Index>(index(occupations))); }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  Eigen::VectorXcd amps_;
};

/// Tensor product; modes of `a` come first.
FockArray tensor(const FockArray& a, const FockArray& b);

/// Two-mode squeezed vacuum sum_n sqrt(N^n / (N+1)^(n+1)) |n, n>, truncated
/// at `dim` levels per mode and not renormalized.
FockArray fock_tmss(double mean_photon, int dim);

enum class QuadraticKind { BeamSplitter, TwoModeSqueezer, Phase };

struct QuadraticGate {
  QuadraticKind kind;
  int mode_a;
  int mode_b;        // ignored for Phase
  double parameter;  // transmissivity / sinh^2 r / phase in radians
};

inline constexpr double kDefaultLeakageBound = 1e-9;

namespace detail {
struct Sector {
  int start_a;
  int start_b;
  int len;
  Eigen::MatrixXcd unitary;
};
}  // namespace detail

/// Precomputed sector propagators of one gate for fixed mode dimensions, so
/// the same gate can be applied to many states without recomputing the
/// matrix exponentials.
class QuadraticPropagator {
 public:
  QuadraticPropagator(const std::vector<int>& mode_dims, const QuadraticGate& gate);
  FockArray apply(const FockArray& state, double leakage_bound = kDefaultLeakageBound) const;

 private:
  QuadraticGate gate_;
  std::vector<int> dims_;
  std::vector<detail::Sector> sectors_;
  int step_a_ = 1;
};

/// Applies exp(generator) for the gate; conventions match gaussian_state.hpp:
///   BeamSplitter:    a_a -> sqrt(k) a_a + sqrt(1-k) a_b
///   TwoModeSqueezer: a_a -> cosh r a_a + sinh r a_b^dagger, sinh^2 r = parameter
///   Phase:           |n> -> e^{i n phi} |n>
/// Throws TruncationOverflow when the population lost to truncation during this
/// application exceeds `leakage_bound`.
FockArray apply_quadratic_unitary(const FockArray& state, const QuadraticGate& gate,
                                  double leakage_bound = kDefaultLeakageBound);

struct FockPhotonStats {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> distribution;  // unnormalized marginal; sums to the stored norm
};

FockPhotonStats fock_photon_stats(const FockArray& state, int mode);

/// Mean and variance of a photon-number distribution (normalized internally).
FockPhotonStats photon_stats_from_distribution(std::vector<double> distribution);

/// <level|_mode applied to the state: the unnormalized branch with that mode
/// measured at `level`, with the mode removed.
FockArray project_mode(const FockArray& state, int mode, int level);

/// Distribution after a pure-loss channel of transmissivity `eta` (binomial thinning).
std::vector<double> binomial_thinning(const std::vector<double>& distribution, double eta);

/// Parameters of the brute-force receiver chain. Only the subset of the full
/// system model that has a unitary Fock-space realization is supported.
struct OracleChainParams {
  double n_s = 0.1;
  double kappa_s = 0.5;
  double kappa_i = 1.0;
  double n_b = 0.5;  // background photons added by the signal channel
  double gain = 1.01;
  double eta_d = 1.0;
  double phi = 0.0;
};

struct OracleChainOptions {
  int truncation = 30;                  // levels for the pair modes and idler-loss environment
  double tail_tolerance = 1e-14;        // probability left out of each mixture (background, idler-loss outcomes)
  double leakage_bound = kDefaultLeakageBound;
};

struct OracleChainResult {
  FockPhotonStats idler;
  int thermal_components = 0;
  int loss_branches = 0;       // idler-loss outcomes kept
  double dropped_weight = 0.0; // mixture probability left out
  double max_leakage = 0.0;
};

/// Detected-idler photon statistics of the quantum-illumination receiver,
/// computed in Fock space. The thermal background is represented as a
/// geometric mixture of Fock states of an explicit environment mode. Each
/// component is evolved as a pure state of signal, idler, background and
/// idler-loss vacuum; the two loss environments are measured out in the Fock
/// basis once their beam splitters have acted, and the idler marginals of all
/// branches are summed with the thermal weights.
OracleChainResult fock_receiver_chain(const OracleChainParams& p, const OracleChainOptions& opt = {});

}  // namespace qi

#endif  // QI_FOCK_HPP
