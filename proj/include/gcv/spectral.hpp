#pragma once

// Spectral cut-off regularization driven by generalized cross-validation.
//
// Everything here is operator agnostic: an operator enters only through a
// SingularSystem (singular values plus a left basis that can project data and
// a right basis that can reconstruct solutions).  Indices follow the usual
// 1-based mathematical convention at the interface (k = number of retained
// components, k = 0 is the zero estimator) and 0-based storage internally.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gcv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when the index ceil(s / eps^2) used by the high-probability error
/// bound falls outside the available spectrum.
class BoundIndexOverflow : public std::out_of_range {
 public:
  BoundIndexOverflow(std::size_t index, std::size_t m)
      : std::out_of_range("error bound index " + std::to_string(index) +
                          " exceeds spectrum size " + std::to_string(m)),
        index_(index),
        m_(m) {}
  std::size_t index() const noexcept { return index_; }
  std::size_t spectrum_size() const noexcept { return m_; }

 private:
  std::size_t index_;
  std::size_t m_;
};

struct GcvParams {
  double epsilon = 1.0 / 12.0;  // oscillation tolerance, 0 < eps <= 1/12
  double k_max_fraction = 0.5;  // GCV searches k in {0, ..., floor(m * fraction)}

  void validate() const {
    if (!(epsilon > 0.0) || epsilon > 1.0 / 12.0 + 1e-15)
      throw std::invalid_argument("epsilon must lie in (0, 1/12]");
    if (!(k_max_fraction > 0.0) || k_max_fraction > 1.0)
      throw std::invalid_argument("k_max_fraction must lie in (0, 1]");
  }
};

/// Noisy data expanded in the left singular basis.  `coeffs` holds the
/// components along the r <= m stored left vectors; whatever part of the data
/// lies outside their span is kept as `residual_energy`, so that
/// sum(coeffs^2) + residual_energy == ||data||^2.
struct ObservationCoefficients {
  std::size_t m = 0;
  Vector coeffs;
  double residual_energy = 0.0;
  std::optional<double> delta_true;

  std::size_t rank() const { return static_cast<std::size_t>(coeffs.size()); }
};

struct CutoffEstimate {
  std::size_t k = 0;
  Vector amplitudes;  // coefficients over v_1, ..., v_k
};

struct OracleIndices {
  std::size_t t = 0;  // weak
  std::size_t s = 0;  // strong
};

// ---------------------------------------------------------------------------
// Singular systems

template <class B>
concept LeftBasis = requires(const B& b, const Vector& x, Eigen::Index j) {
  { b.dimension() } -> std::convertible_to<Eigen::Index>;
  { b.size() } -> std::convertible_to<Eigen::Index>;
  { b.coefficients(x) } -> std::convertible_to<Vector>;
  { b.residual_energy(x, x) } -> std::convertible_to<double>;
  { b.vector(j) } -> std::convertible_to<Vector>;
};

/// Singular values with their left and right bases.  `sigmas` is indexed from
/// zero: sigmas[j] is sigma_{j+1}.
template <LeftBasis Left, class Right>
struct SingularSystem {
  Vector sigmas;
  Left left;
  Right right;

  std::size_t m() const { return static_cast<std::size_t>(left.dimension()); }
  std::size_t rank() const { return static_cast<std::size_t>(sigmas.size()); }

  /// Checks sigma_j >= sigma_{j+1} > 0 and that sizes agree.
  void validate() const {
    if (sigmas.size() != left.size())
      throw std::invalid_argument("singular value count does not match the left basis");
    if (static_cast<std::size_t>(sigmas.size()) > m())
      throw std::invalid_argument("more singular values than data dimensions");
    for (Eigen::Index j = 0; j < sigmas.size(); ++j) {
      if (!(sigmas[j] > 0.0)) throw std::invalid_argument("singular values must be positive");
      if (j > 0 && sigmas[j] > sigmas[j - 1])
        throw std::invalid_argument("singular values must be non-increasing");
    }
  }
};

/// Largest deviation of the Gram matrix of the left vectors from the identity.
template <LeftBasis Left>
double orthonormality_defect(const Left& left) {
  const Eigen::Index r = left.size();
  Matrix vectors(left.dimension(), r);
  for (Eigen::Index j = 0; j < r; ++j) vectors.col(j) = left.vector(j);
  const Matrix gram = vectors.transpose() * vectors;
  return (gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Operations

template <LeftBasis Left, class Right>
ObservationCoefficients project_observations(const Vector& data,
                                             const SingularSystem<Left, Right>& system) {
  if (static_cast<std::size_t>(data.size()) != system.m())
    throw std::invalid_argument("data dimension " + std::to_string(data.size()) +
                                " does not match operator range dimension " +
                                std::to_string(system.m()));
  ObservationCoefficients obs;
  obs.m = system.m();
  obs.coeffs = system.left.coefficients(data);
  obs.residual_energy = system.left.residual_energy(data, obs.coeffs);
  return obs;
}

namespace detail {

// tail[k] = sum_{j >= k} c_j^2 (0-based) + residual, accumulated from the end.
inline std::vector<double> tail_energies(const ObservationCoefficients& obs) {
  const std::size_t r = obs.rank();
  std::vector<double> tail(r + 1);
  tail[r] = obs.residual_energy;
  for (std::size_t j = r; j-- > 0;) tail[j] = tail[j + 1] + obs.coeffs[j] * obs.coeffs[j];
  return tail;
}

inline std::size_t gcv_search_limit(const ObservationCoefficients& obs, const GcvParams& params) {
  const auto by_fraction = static_cast<std::size_t>(
      std::floor(static_cast<double>(obs.m) * params.k_max_fraction + 1e-12));
  return std::min({by_fraction, obs.rank(), obs.m - 1});
}

}  // namespace detail

/// Psi_m(k) = sum_{j>k} c_j^2 / (1 - k/m)^2.
inline double gcv_score(const ObservationCoefficients& obs, std::size_t k) {
  if (k >= obs.m) throw std::invalid_argument("gcv_score requires k < m");
  double tail = obs.residual_energy;
  for (std::size_t j = obs.rank(); j-- > k;) tail += obs.coeffs[j] * obs.coeffs[j];
  const double shrink = 1.0 - static_cast<double>(k) / static_cast<double>(obs.m);
  return tail / (shrink * shrink);
}

/// All GCV scores Psi_m(0..k_max).
inline std::vector<double> gcv_scores(const ObservationCoefficients& obs, std::size_t k_max) {
  if (k_max >= obs.m) throw std::invalid_argument("gcv_scores requires k_max < m");
  const auto tail = detail::tail_energies(obs);
  std::vector<double> scores(k_max + 1);
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double energy = k <= obs.rank() ? tail[k] : obs.residual_energy;
    const double shrink = 1.0 - static_cast<double>(k) / static_cast<double>(obs.m);
    scores[k] = energy / (shrink * shrink);
  }
  return scores;
}

/// argmin of Psi_m over k in {0, ..., floor(m * k_max_fraction)}, smallest k on
/// ties.  Beyond the stored rank the score only grows, so the search stops
/// there as well.
inline std::size_t select_gcv_index(const ObservationCoefficients& obs,
                                    const GcvParams& params = {}) {
  params.validate();
  if (obs.m < 2) throw std::invalid_argument("select_gcv_index requires m >= 2");
  const auto scores = gcv_scores(obs, detail::gcv_search_limit(obs, params));
  return static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
}

inline CutoffEstimate cutoff_estimate(const ObservationCoefficients& obs, const Vector& sigmas,
                                      std::size_t k) {
  if (k > obs.m) throw std::invalid_argument("cutoff index exceeds m");
  if (k > obs.rank() || k > static_cast<std::size_t>(sigmas.size()))
    throw std::invalid_argument("cutoff index exceeds the available singular values");
  CutoffEstimate est;
  est.k = k;
  est.amplitudes = obs.coeffs.head(static_cast<Eigen::Index>(k)).cwiseQuotient(
      sigmas.head(static_cast<Eigen::Index>(k)));
  return est;
}

template <LeftBasis Left, class Right>
CutoffEstimate cutoff_estimate(const ObservationCoefficients& obs,
                               const SingularSystem<Left, Right>& system, std::size_t k) {
  return cutoff_estimate(obs, system.sigmas, k);
}

namespace detail {

inline void check_oracle_inputs(const Vector& f_coeffs, const Vector& sigmas, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("oracle requires delta > 0");
  if (f_coeffs.size() != sigmas.size())
    throw std::invalid_argument("oracle inputs must have equal length");
}

}  // namespace detail

/// t = max{0 <= k <= m : k delta^2 <= sum_{j>k} sigma_j^2 <f, v_j>^2}.
inline std::size_t weak_oracle(const Vector& f_coeffs, const Vector& sigmas, double delta) {
  detail::check_oracle_inputs(f_coeffs, sigmas, delta);
  const auto m = static_cast<std::size_t>(f_coeffs.size());
  std::vector<double> tail(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) {
    const double g = sigmas[j] * f_coeffs[j];
    tail[j] = tail[j + 1] + g * g;
  }
  std::size_t best = 0;
  const double d2 = delta * delta;
  for (std::size_t k = 1; k <= m; ++k)
    if (static_cast<double>(k) * d2 <= tail[k]) best = k;
  return best;
}

/// s = max{0 <= k <= m : k delta^2 / sigma_k^2 <= sum_{j>k} <f, v_j>^2}.
inline std::size_t strong_oracle(const Vector& f_coeffs, const Vector& sigmas, double delta) {
  detail::check_oracle_inputs(f_coeffs, sigmas, delta);
  const auto m = static_cast<std::size_t>(f_coeffs.size());
  std::vector<double> tail(m + 1, 0.0);
  for (std::size_t j = m; j-- > 0;) tail[j] = tail[j + 1] + f_coeffs[j] * f_coeffs[j];
  std::size_t best = 0;
  const double d2 = delta * delta;
  for (std::size_t k = 1; k <= m; ++k) {
    const double sk = sigmas[static_cast<Eigen::Index>(k - 1)];
    if (static_cast<double>(k) * d2 / (sk * sk) <= tail[k]) best = k;
  }
  return best;
}

inline OracleIndices oracle_indices(const Vector& f_coeffs, const Vector& sigmas, double delta) {
  return {weak_oracle(f_coeffs, sigmas, delta), strong_oracle(f_coeffs, sigmas, delta)};
}

/// argmin over the full index range 0..m, smallest k on ties.
inline std::size_t optimal_index(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("optimal_index needs at least one error value");
  return static_cast<std::size_t>(std::min_element(errors.begin(), errors.end()) - errors.begin());
}

/// Squared reconstruction errors e_k^2 for every cut-off k = 0..r, for a known
/// exact solution with right-basis coefficients `exact` (length >= r; entries
/// beyond r are never reconstructed) plus a k-independent `floor` term:
///   e_k^2 = sum_{j<=k} (c_j/sigma_j - a_j)^2 + sum_{j>k} a_j^2 + floor.
inline std::vector<double> cutoff_error_profile(const ObservationCoefficients& obs,
                                                const Vector& sigmas, const Vector& exact,
                                                double floor = 0.0) {
  const std::size_t r = obs.rank();
  if (static_cast<std::size_t>(sigmas.size()) < r || static_cast<std::size_t>(exact.size()) < r)
    throw std::invalid_argument("error profile inputs are shorter than the observation rank");
  const auto q = static_cast<std::size_t>(exact.size());
  std::vector<double> tail(q + 1, 0.0);
  for (std::size_t j = q; j-- > 0;) tail[j] = tail[j + 1] + exact[j] * exact[j];
  std::vector<double> profile(r + 1);
  double head = 0.0;
  profile[0] = tail[0] + floor;
  for (std::size_t k = 1; k <= r; ++k) {
    const double diff = obs.coeffs[k - 1] / sigmas[k - 1] - exact[k - 1];
    head += diff * diff;
    profile[k] = head + tail[k] + floor;
  }
  return profile;
}

// ---------------------------------------------------------------------------
// High-probability error bound for the GCV-selected estimator.

/// L = sqrt(1 + eps) / eps + sqrt(34 eps + 36).
inline double bound_constant(double epsilon) {
  return std::sqrt(1.0 + epsilon) / epsilon + std::sqrt(34.0 * epsilon + 36.0);
}

/// ceil(s / eps^2), guarded against round-off in eps^2 (1/12 is not exact).
inline std::size_t bound_index(std::size_t s_oracle, double epsilon) {
  const double raw = static_cast<double>(s_oracle) / (epsilon * epsilon);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

/// L * sqrt(s) * delta / sigma_{ceil(s/eps^2)}.  Throws BoundIndexOverflow if
/// the index leaves the spectrum.
inline double theorem_l2_bound(std::size_t s_oracle, double delta, const Vector& sigmas,
                               const GcvParams& params = {}) {
  params.validate();
  if (s_oracle == 0) return 0.0;
  const std::size_t idx = bound_index(s_oracle, params.epsilon);
  const auto m = static_cast<std::size_t>(sigmas.size());
  if (idx > m) throw BoundIndexOverflow(idx, m);
  return bound_constant(params.epsilon) * std::sqrt(static_cast<double>(s_oracle)) * delta /
         sigmas[static_cast<Eigen::Index>(idx - 1)];
}

}  // namespace gcv
