#ifndef QI_GAUSSIAN_STATE_HPP
#define QI_GAUSSIAN_STATE_HPP

// Multimode Gaussian states in the quadrature picture.
//
// Conventions used throughout:
//   x_j = (a_j + a_j^dagger) / sqrt(2),  p_j = (a_j - a_j^dagger) / (i sqrt(2))
//   ordering of the phase-space vector is (x_0, p_0, x_1, p_1, ...)
//   cov_ij = <{dR_i, dR_j}> / 2, so the vacuum covariance is I/2.
//
// Beam splitter convention (real, fixed once):
//   a_j -> sqrt(k) a_j + sqrt(1-k) a_k
//   a_k -> -sqrt(1-k) a_j + sqrt(k) a_k
//
// Every operation is a pure function returning a new state.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qi {

template <typename Scalar>
class GaussianState {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() == 0 || mean_.size() % 2 != 0)
      throw std::invalid_argument("GaussianState: mean must have even, nonzero length");
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
      throw std::invalid_argument("GaussianState: covariance shape does not match mean");
  }

  int n_modes() const { return static_cast<int>(mean_.size() / 2); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

 private:
  Vector mean_;
  Matrix cov_;
};

using GaussianStateXd = GaussianState<double>;
using GaussianStateXf = GaussianState<float>;

namespace detail {

inline void check_mode(int n_modes, int j, const char* op) {
  if (j < 0 || j >= n_modes)
    throw std::out_of_range(std::string(op) + ": mode index " + std::to_string(j) + " out of range");
}

inline void check_pair(int n_modes, int j, int k, const char* op) {
  check_mode(n_modes, j, op);
  check_mode(n_modes, k, op);
  if (j == k) throw std::invalid_argument(std::string(op) + ": modes must be distinct");
}

template <typename Scalar>
void check_unit_interval(Scalar v, const char* op, const char* name) {
  if (!(v >= Scalar(0) && v <= Scalar(1)))
    throw std::invalid_argument(std::string(op) + ": " + name + " must lie in [0, 1]");
}

// Applies a symplectic map that acts only on the listed modes. `local` is the
// 2m x 2m matrix in the (x, p) ordering of `modes`.
template <typename Scalar>
GaussianState<Scalar> apply_local_symplectic(
    const GaussianState<Scalar>& state, std::span<const int> modes,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& local) {
  using Matrix = typename GaussianState<Scalar>::Matrix;
  const Eigen::Index dim = state.mean().size();
  Matrix s = Matrix::Identity(dim, dim);
  for (std::size_t a = 0; a < modes.size(); ++a)
    for (std::size_t b = 0; b < modes.size(); ++b)
      s.template block<2, 2>(2 * modes[a], 2 * modes[b]) =
          local.template block<2, 2>(2 * a, 2 * b);
  return GaussianState<Scalar>(s * state.mean(), s * state.cov() * s.transpose());
}

}  // namespace detail

/// The standard symplectic form, block-diagonal with [[0, 1], [-1, 0]].
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> symplectic_form(int n_modes) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> omega =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * n_modes, 2 * n_modes);
  for (int j = 0; j < n_modes; ++j) {
    omega(2 * j, 2 * j + 1) = Scalar(1);
    omega(2 * j + 1, 2 * j) = Scalar(-1);
  }
  return omega;
}

template <typename Scalar = double>
GaussianState<Scalar> vacuum(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("vacuum: mode count must be positive");
  using S = GaussianState<Scalar>;
  return S(S::Vector::Zero(2 * n_modes),
           S::Matrix::Identity(2 * n_modes, 2 * n_modes) * Scalar(0.5));
}

template <typename Scalar = double>
GaussianState<Scalar> thermal(Scalar nbar) {
  if (!(nbar >= Scalar(0))) throw std::invalid_argument("thermal: nbar must be non-negative");
  using S = GaussianState<Scalar>;
  return S(S::Vector::Zero(2), S::Matrix::Identity(2, 2) * (nbar + Scalar(0.5)));
}

template <typename Scalar = double>
GaussianState<Scalar> coherent(std::complex<Scalar> alpha) {
  using S = GaussianState<Scalar>;
  typename S::Vector mean(2);
  mean << std::numbers::sqrt2_v<Scalar> * alpha.real(), std::numbers::sqrt2_v<Scalar> * alpha.imag();
  return S(mean, S::Matrix::Identity(2, 2) * Scalar(0.5));
}

/// Tensor product; modes of `a` come first.
template <typename Scalar>
GaussianState<Scalar> tensor(const GaussianState<Scalar>& a, const GaussianState<Scalar>& b) {
  using S = GaussianState<Scalar>;
  const Eigen::Index na = a.mean().size(), nb = b.mean().size();
  typename S::Vector mean(na + nb);
  mean << a.mean(), b.mean();
  typename S::Matrix cov = S::Matrix::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  return S(mean, cov);
}

template <typename Scalar>
GaussianState<Scalar> phase_shift(const GaussianState<Scalar>& state, int j, Scalar phi) {
  detail::check_mode(state.n_modes(), j, "phase_shift");
  const Scalar c = std::cos(phi), s = std::sin(phi);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> local(2, 2);
  local << c, -s, s, c;
  const int modes[] = {j};
  return detail::apply_local_symplectic<Scalar>(state, modes, local);
}

template <typename Scalar>
GaussianState<Scalar> beam_splitter(const GaussianState<Scalar>& state, int j, int k,
                                    Scalar transmissivity) {
  detail::check_pair(state.n_modes(), j, k, "beam_splitter");
  detail::check_unit_interval(transmissivity, "beam_splitter", "transmissivity");
  const Scalar t = std::sqrt(transmissivity), r = std::sqrt(Scalar(1) - transmissivity);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> local =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(4, 4);
  local(0, 0) = local(1, 1) = t;
  local(0, 2) = local(1, 3) = r;
  local(2, 0) = local(3, 1) = -r;
  local(2, 2) = local(3, 3) = t;
  const int modes[] = {j, k};
  return detail::apply_local_symplectic<Scalar>(state, modes, local);
}

/// Two-mode squeezer a_j -> cosh r a_j + sinh r a_k^dagger (and j <-> k) with
/// sinh^2 r = mean_photon. Acting on vacuum it produces the two-mode squeezed
/// vacuum with per-mode mean photon number `mean_photon`; as an amplifier its
/// gain is cosh^2 r = mean_photon + 1.
template <typename Scalar>
GaussianState<Scalar> two_mode_squeeze(const GaussianState<Scalar>& state, int j, int k,
                                       Scalar mean_photon) {
  detail::check_pair(state.n_modes(), j, k, "two_mode_squeeze");
  if (!(mean_photon >= Scalar(0)))
    throw std::invalid_argument("two_mode_squeeze: mean photon number must be non-negative");
  const Scalar c = std::sqrt(mean_photon + Scalar(1)), s = std::sqrt(mean_photon);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> local =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(4, 4);
  local(0, 0) = local(1, 1) = local(2, 2) = local(3, 3) = c;
  local(0, 2) = local(2, 0) = s;
  local(1, 3) = local(3, 1) = -s;
  const int modes[] = {j, k};
  return detail::apply_local_symplectic<Scalar>(state, modes, local);
}

/// Phase-insensitive amplifier on mode `idler` pumped against `signal`:
/// a_idler -> sqrt(G) a_idler + sqrt(G-1) a_signal^dagger.
template <typename Scalar>
GaussianState<Scalar> parametric_amplifier(const GaussianState<Scalar>& state, int idler,
                                           int signal, Scalar gain) {
  if (!(gain >= Scalar(1))) throw std::invalid_argument("parametric_amplifier: gain must be >= 1");
  return two_mode_squeeze(state, idler, signal, gain - Scalar(1));
}

/// Single-mode squeezer along x: x -> e^{-r} x, p -> e^{r} p.
template <typename Scalar>
GaussianState<Scalar> squeeze(const GaussianState<Scalar>& state, int j, Scalar r) {
  detail::check_mode(state.n_modes(), j, "squeeze");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> local(2, 2);
  local << std::exp(-r), Scalar(0), Scalar(0), std::exp(r);
  const int modes[] = {j};
  return detail::apply_local_symplectic<Scalar>(state, modes, local);
}

/// Keeps the listed modes, in the listed order.
template <typename Scalar>
GaussianState<Scalar> partial_trace(const GaussianState<Scalar>& state, std::span<const int> keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be non-empty");
  for (int j : keep) detail::check_mode(state.n_modes(), j, "partial_trace");
  using S = GaussianState<Scalar>;
  const Eigen::Index n = static_cast<Eigen::Index>(keep.size());
  typename S::Vector mean(2 * n);
  typename S::Matrix cov(2 * n, 2 * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    mean.template segment<2>(2 * a) = state.mean().template segment<2>(2 * keep[a]);
    for (Eigen::Index b = 0; b < n; ++b)
      cov.template block<2, 2>(2 * a, 2 * b) =
          state.cov().template block<2, 2>(2 * keep[a], 2 * keep[b]);
  }
  return S(mean, cov);
}

template <typename Scalar>
GaussianState<Scalar> partial_trace(const GaussianState<Scalar>& state,
                                    std::initializer_list<int> keep) {
  return partial_trace(state, std::span<const int>(keep.begin(), keep.size()));
}

/// Lossy channel on mode j: mixes it on a beam splitter of transmissivity
/// `transmissivity` with a fresh thermal environment mode of mean photon
/// number `env_nbar`, then discards the environment. Implemented directly in
/// its (X, Y) form: mean -> sqrt(k) mean, cov_jj -> k cov_jj + (1-k)(env_nbar + 1/2) I,
/// cross blocks with other modes scaled by sqrt(k).
template <typename Scalar>
GaussianState<Scalar> loss_channel(const GaussianState<Scalar>& state, int j, Scalar transmissivity,
                                   Scalar env_nbar) {
  detail::check_mode(state.n_modes(), j, "loss_channel");
  detail::check_unit_interval(transmissivity, "loss_channel", "transmissivity");
  if (!(env_nbar >= Scalar(0)))
    throw std::invalid_argument("loss_channel: environment photon number must be non-negative");
  using S = GaussianState<Scalar>;
  const Scalar t = std::sqrt(transmissivity);
  typename S::Vector mean = state.mean();
  typename S::Matrix cov = state.cov();
  mean.template segment<2>(2 * j) *= t;
  cov.middleRows(2 * j, 2) *= t;
  cov.middleCols(2 * j, 2) *= t;
  cov.template block<2, 2>(2 * j, 2 * j) +=
      S::Matrix::Identity(2, 2) * ((Scalar(1) - transmissivity) * (env_nbar + Scalar(0.5)));
  return S(mean, cov);
}

/// Scales every covariance entry coupling mode j to mode k by `factor`
/// (0 <= factor <= 1). For zero-mean states this is a convex mixture of the
/// covariance with the product of its marginals, so the result stays physical.
template <typename Scalar>
GaussianState<Scalar> scale_cross_correlation(const GaussianState<Scalar>& state, int j, int k,
                                              Scalar factor) {
  detail::check_pair(state.n_modes(), j, k, "scale_cross_correlation");
  detail::check_unit_interval(factor, "scale_cross_correlation", "factor");
  typename GaussianState<Scalar>::Matrix cov = state.cov();
  cov.template block<2, 2>(2 * j, 2 * k) *= factor;
  cov.template block<2, 2>(2 * k, 2 * j) *= factor;
  return GaussianState<Scalar>(state.mean(), cov);
}

template <typename Scalar>
std::complex<Scalar> mean_amplitude(const GaussianState<Scalar>& state, int j) {
  detail::check_mode(state.n_modes(), j, "mean_amplitude");
  return std::complex<Scalar>(state.mean()(2 * j), state.mean()(2 * j + 1)) /
         std::numbers::sqrt2_v<Scalar>;
}

/// <a_j^dagger a_j>.
template <typename Scalar>
Scalar photon_mean(const GaussianState<Scalar>& state, int j) {
  detail::check_mode(state.n_modes(), j, "photon_mean");
  const auto v = state.cov().template block<2, 2>(2 * j, 2 * j);
  const auto m = state.mean().template segment<2>(2 * j);
  return (v.trace() + m.squaredNorm() - Scalar(1)) / Scalar(2);
}

/// Var(a_j^dagger a_j) = tr(V^2)/2 - 1/4 + m^T V m for the mode's 2x2 block.
/// Exact for any Gaussian state; reduces to nbar^2 + nbar + |<aa>|^2 at zero mean.
template <typename Scalar>
Scalar photon_variance(const GaussianState<Scalar>& state, int j) {
  detail::check_mode(state.n_modes(), j, "photon_variance");
  const Eigen::Matrix<Scalar, 2, 2> v = state.cov().template block<2, 2>(2 * j, 2 * j);
  const Eigen::Matrix<Scalar, 2, 1> m = state.mean().template segment<2>(2 * j);
  return (v * v).trace() / Scalar(2) - Scalar(0.25) + m.dot(v * m);
}

template <typename Scalar>
struct QuadratureStats {
  Scalar mean;
  Scalar variance;
};

/// Statistics of x_theta = (a e^{-i theta} + a^dagger e^{i theta}) / sqrt(2).
template <typename Scalar>
QuadratureStats<Scalar> quadrature_stats(const GaussianState<Scalar>& state, int j, Scalar theta) {
  detail::check_mode(state.n_modes(), j, "quadrature_stats");
  const Eigen::Matrix<Scalar, 2, 1> u(std::cos(theta), std::sin(theta));
  const Eigen::Matrix<Scalar, 2, 2> v = state.cov().template block<2, 2>(2 * j, 2 * j);
  return {u.dot(state.mean().template segment<2>(2 * j)), u.dot(v * u)};
}

/// Second moments in the mode-operator picture.
template <typename Scalar>
struct ModeMoments {
  using Complex = std::complex<Scalar>;
  using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean_photon;  // <a_j^dagger a_j>
  ComplexMatrix normal;      // <a_j^dagger a_k>
  ComplexMatrix anomalous;   // <a_j a_k>; diagonal is the self phase-sensitive term <a_j a_j>

  Complex self_psc(int j) const { return anomalous(j, j); }
  Complex pscc(int j, int k) const { return anomalous(j, k); }
};

template <typename Scalar>
ModeMoments<Scalar> mode_moments(const GaussianState<Scalar>& state) {
  using Complex = std::complex<Scalar>;
  const int n = state.n_modes();
  const auto& v = state.cov();
  ModeMoments<Scalar> out;
  out.mean_photon.resize(n);
  out.normal.resize(n, n);
  out.anomalous.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const Complex aj = mean_amplitude(state, j);
    out.mean_photon(j) = photon_mean(state, j);
    for (int k = 0; k < n; ++k) {
      const Complex ak = mean_amplitude(state, k);
      const Scalar xx = v(2 * j, 2 * k), pp = v(2 * j + 1, 2 * k + 1);
      const Scalar xp = v(2 * j, 2 * k + 1), px = v(2 * j + 1, 2 * k);
      // Symmetrized covariances give the ordered products exactly, except for
      // the commutator on the diagonal of <a^dagger a>.
      out.anomalous(j, k) = Complex((xx - pp) / 2, (xp + px) / 2) + aj * ak;
      out.normal(j, k) = Complex((xx + pp) / 2, (xp - px) / 2) + std::conj(aj) * ak;
    }
    out.normal(j, j) = Complex(out.mean_photon(j), Scalar(0));
  }
  return out;
}

/// Smallest eigenvalue of the Hermitian matrix cov + (i/2) Omega; a physical
/// state has it >= 0.
template <typename Scalar>
Scalar uncertainty_min_eigenvalue(const GaussianState<Scalar>& state) {
  using Complex = std::complex<Scalar>;
  using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
  const CMatrix h = state.cov().template cast<Complex>() +
                    Complex(0, Scalar(0.5)) * symplectic_form<Scalar>(state.n_modes()).template cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

template <typename Scalar>
Scalar symmetry_defect(const GaussianState<Scalar>& state) {
  return (state.cov() - state.cov().transpose()).cwiseAbs().maxCoeff();
}

/// Checks the covariance invariants at the given tolerances.
template <typename Scalar>
bool is_physical(const GaussianState<Scalar>& state, Scalar symmetry_tol = Scalar(1e-12),
                 Scalar eigen_tol = Scalar(1e-10)) {
  return symmetry_defect(state) <= symmetry_tol && uncertainty_min_eigenvalue(state) >= -eigen_tol;
}

}  // namespace qi

#endif  // QI_GAUSSIAN_STATE_HPP
