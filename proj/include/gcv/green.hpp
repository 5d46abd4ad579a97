#pragma once

// Closed-form singular system of the integral operator with the Green's
// function of -u'' on (0,1) as kernel, observed by point collocation at
// xi_j = j/(m+1), together with random Hoelder-class sources, their exact
// data and the error bookkeeping of the simulation study.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gcv/rng.hpp"
#include "gcv/spectral.hpp"

namespace gcv::green {

using std::numbers::pi;

enum class KernelForm {
  min_product,  // kappa(x,y) = min(x,y) (1 - max(x,y)), the Green's function
  printed_max,  // max(x(1-y), y(1-x)); kept only to document the discrepancy
};

inline double kernel_value(double x, double y, KernelForm form = KernelForm::min_product) {
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
    throw std::domain_error("kernel arguments must lie in [0, 1]");
  if (form == KernelForm::printed_max) return std::max(x * (1.0 - y), y * (1.0 - x));
  return std::min(x, y) * (1.0 - std::max(x, y));
}

/// Continuous spectrum: lambda_k = pi^2 k^2, sigma_k = 1 / lambda_k.
inline double lambda(std::size_t k) {
  const double kk = static_cast<double>(k);
  return pi * pi * kk * kk;
}
inline double sigma_continuous(std::size_t k) { return 1.0 / lambda(k); }

/// sigma_{k,m} = sqrt(1 - 2/3 sin^2 x) / (4 (m+1)^{3/2} sin^2 x), x = k pi / (2(m+1)).
inline double discrete_singular_value(std::size_t k, std::size_t m) {
  if (k < 1 || k > m) throw std::invalid_argument("discrete_singular_value requires 1 <= k <= m");
  const double n1 = static_cast<double>(m + 1);
  const double sx = std::sin(static_cast<double>(k) * pi / (2.0 * n1));
  const double s2 = sx * sx;
  return std::sqrt(1.0 - 2.0 / 3.0 * s2) / (4.0 * n1 * std::sqrt(n1) * s2);
}

/// Eigenvalue of S_m = (kappa(xi_s, xi_t)) on z_{k,m}:
/// mu_{k,m} = cot(x) / (2 (m+1) sin(2x)), x = k pi / (2(m+1)).
inline double s_matrix_eigenvalue(std::size_t k, std::size_t m) {
  if (k < 1 || k > m) throw std::invalid_argument("s_matrix_eigenvalue requires 1 <= k <= m");
  const double n1 = static_cast<double>(m + 1);
  const double x = static_cast<double>(k) * pi / (2.0 * n1);
  return std::cos(x) / std::sin(x) / (2.0 * n1 * std::sin(2.0 * x));
}

/// Eigenvalue of the tridiagonal R_m = tridiag(1, 4, 1) on z_{k,m}.
inline double r_matrix_eigenvalue(std::size_t k, std::size_t m) {
  return 4.0 + 2.0 * std::cos(static_cast<double>(k) * pi / static_cast<double>(m + 1));
}

struct GreenMatrices {
  Matrix delta;  // tridiag(-1, 2, -1)
  Matrix r;      // tridiag(1, 4, 1)
  Matrix s;      // kappa(xi_s, xi_t)
  Matrix t;      // int kappa(xi_i, y) kappa(xi_j, y) dy
};

inline GreenMatrices build_matrices(std::size_t m, KernelForm form = KernelForm::min_product) {
  if (m < 1) throw std::invalid_argument("build_matrices requires m >= 1");
  const auto n = static_cast<Eigen::Index>(m);
  const double n1 = static_cast<double>(m + 1);
  GreenMatrices g{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix(n, n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    g.delta(i, i) = 2.0;
    g.r(i, i) = 4.0;
    if (i + 1 < n) {
      g.delta(i, i + 1) = g.delta(i + 1, i) = -1.0;
      g.r(i, i + 1) = g.r(i + 1, i) = 1.0;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i + 1) / n1;
    for (Eigen::Index j = i; j < n; ++j) {
      const double xj = static_cast<double>(j + 1) / n1;
      g.s(i, j) = g.s(j, i) = kernel_value(xi, xj, form);
      g.t(i, j) = g.t(j, i) = xi * (1.0 - xj) * (-xi * xi - xj * xj + 2.0 * xj) / 6.0;
    }
  }
  return g;
}

/// sum_{l=1}^m sin(j pi l/(m+1)) sin(k pi l/(m+1)) by case analysis on
/// j = t(m+1) + s: (m+1)/2 if s == k and t even, -(m+1)/2 if s + k == m + 1
/// and t odd, zero otherwise.
inline double trig_orthogonality(std::size_t j, std::size_t k, std::size_t m) {
  if (j < 1 || k < 1 || k > m) throw std::invalid_argument("trig_orthogonality requires j >= 1, 1 <= k <= m");
  const std::size_t t = j / (m + 1);
  const std::size_t s = j % (m + 1);
  const double half = static_cast<double>(m + 1) / 2.0;
  if (s == k && t % 2 == 0) return half;
  if (s + k == m + 1 && t % 2 == 1) return -half;
  return 0.0;
}

/// Sign of <v_j, v_{k,m}> (+1, -1 or 0) from the aliasing selection rule.
inline int cross_gram_sign(std::size_t j, std::size_t k, std::size_t m) {
  const double v = trig_orthogonality(j, k, m);
  return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

/// <v_j, v_{k,m}> = sign * sqrt(m+1) sigma_j / sigma_{k,m}.
inline double cross_gram(std::size_t j, std::size_t k, std::size_t m) {
  const int sign = cross_gram_sign(j, k, m);
  if (sign == 0) return 0.0;
  return sign * std::sqrt(static_cast<double>(m + 1)) * sigma_continuous(j) /
         discrete_singular_value(k, m);
}

// ---------------------------------------------------------------------------
// Bases of the semi-discrete operator

/// Table of sin(n pi / (m+1)) for n = 0 .. 2(m+1)-1, so that
/// sin(a b pi / (m+1)) = table[(a b) mod 2(m+1)].
class SineTable {
 public:
  explicit SineTable(std::size_t m) : m_(m), period_(2 * (m + 1)), values_(period_) {
    for (std::size_t n = 0; n < period_; ++n)
      values_[n] = std::sin(static_cast<double>(n) * pi / static_cast<double>(m + 1));
    // Exact zeros and signs at the symmetry points.
    values_[0] = 0.0;
    values_[m + 1] = 0.0;
  }
  std::size_t m() const { return m_; }
  std::size_t period() const { return period_; }
  double operator()(std::size_t a, std::size_t b) const { return values_[(a * b) % period_]; }
  double at(std::size_t n) const { return values_[n % period_]; }

 private:
  std::size_t m_;
  std::size_t period_;
  std::vector<double> values_;
};

/// Left singular vectors u_{k,m} = sqrt(2/(m+1)) (sin(k pi xi_j))_j, applied
/// through a sine table (no dense matrix is stored).
class SineBasis {
 public:
  explicit SineBasis(std::shared_ptr<const SineTable> table) : table_(std::move(table)) {}

  Eigen::Index dimension() const { return static_cast<Eigen::Index>(table_->m()); }
  Eigen::Index size() const { return dimension(); }

  Vector coefficients(const Vector& x) const {
    const std::size_t m = table_->m();
    const std::size_t period = table_->period();
    if (static_cast<std::size_t>(x.size()) != m) throw std::invalid_argument("sine basis: size mismatch");
    const double scale = std::sqrt(2.0 / static_cast<double>(m + 1));
    Vector c(static_cast<Eigen::Index>(m));
    for (std::size_t k = 1; k <= m; ++k) {
      double acc = 0.0;
      std::size_t idx = 0;
      for (std::size_t l = 1; l <= m; ++l) {
        idx += k;
        if (idx >= period) idx -= period;
        acc += x[static_cast<Eigen::Index>(l - 1)] * table_->at(idx);
      }
      c[static_cast<Eigen::Index>(k - 1)] = scale * acc;
    }
    return c;
  }

  double residual_energy(const Vector&, const Vector&) const { return 0.0; }

  Vector vector(Eigen::Index j) const {
    const std::size_t m = table_->m();
    const double scale = std::sqrt(2.0 / static_cast<double>(m + 1));
    Vector u(static_cast<Eigen::Index>(m));
    for (std::size_t l = 1; l <= m; ++l)
      u[static_cast<Eigen::Index>(l - 1)] = scale * (*table_)(static_cast<std::size_t>(j) + 1, l);
    return u;
  }

 private:
  std::shared_ptr<const SineTable> table_;
};

/// Right singular functions v_{k,m} = sum_l (z_{k,m})_l kappa(xi_l, .) / sigma_{k,m},
/// i.e. an expansion over the dictionary {kappa(xi_l, .)}_l of piecewise
/// linear functions.
class KernelDictionary {
 public:
  KernelDictionary(std::shared_ptr<const SineTable> table, Vector sigmas)
      : table_(std::move(table)), sigmas_(std::move(sigmas)) {}

  std::size_t m() const { return table_->m(); }

  /// Dictionary coefficients of v_{j+1,m}.
  Vector expansion(Eigen::Index j) const {
    SineBasis basis(table_);
    return basis.vector(j) / sigmas_[j];
  }

  /// v_{j+1,m}(y).
  double evaluate(Eigen::Index j, double y) const {
    const Vector coeff = expansion(j);
    const double n1 = static_cast<double>(m() + 1);
    double acc = 0.0;
    for (Eigen::Index l = 0; l < coeff.size(); ++l)
      acc += coeff[l] * kernel_value(static_cast<double>(l + 1) / n1, y);
    return acc;
  }

 private:
  std::shared_ptr<const SineTable> table_;
  Vector sigmas_;
};

using GreenSystem = SingularSystem<SineBasis, KernelDictionary>;

/// Semi-discrete model K_m for m collocation points.  Cheap to copy; the sine
/// table is shared.
class GreenModel {
 public:
  explicit GreenModel(std::size_t m)
      : m_(m), table_(m >= 1 ? std::make_shared<SineTable>(m) : nullptr) {
    if (m < 1) throw std::invalid_argument("GreenModel requires m >= 1");
    sigmas_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t k = 1; k <= m; ++k)
      sigmas_[static_cast<Eigen::Index>(k - 1)] = discrete_singular_value(k, m);
  }

  std::size_t m() const { return m_; }
  double xi(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(m_ + 1); }
  const Vector& sigmas() const { return sigmas_; }
  double sigma(std::size_t k) const { return sigmas_[static_cast<Eigen::Index>(k - 1)]; }
  const SineTable& sine_table() const { return *table_; }

  /// z_{k,m} (equal to u_{k,m}).
  Vector z_vector(std::size_t k) const {
    return SineBasis(table_).vector(static_cast<Eigen::Index>(k - 1));
  }

  GreenSystem system() const {
    return GreenSystem{sigmas_, SineBasis(table_), KernelDictionary(table_, sigmas_)};
  }

 private:
  std::size_t m_;
  std::shared_ptr<const SineTable> table_;
  Vector sigmas_;
};

// ---------------------------------------------------------------------------
// Random sources and exact data

/// f = sum_{j<=D} sigma_j^s X_j v_j with standard normal X_j.
struct SampledSource {
  double s = 0.0;
  std::size_t bandwidth = 0;  // D
  std::uint64_t seed = 0;
  Vector draws;     // X_j
  Vector f_coeffs;  // <f, v_j>

  /// ||h|| for f = (K*K)^{s/2} h, i.e. the source-condition radius.
  double rho() const { return draws.norm(); }
  double norm() const { return f_coeffs.norm(); }

  /// Source built from given draws (test hook; the seed is left at zero).
  static SampledSource from_draws(double s, Vector draws) {
    if (!(s > 0.0)) throw std::invalid_argument("smoothness must be positive");
    SampledSource src;
    src.s = s;
    src.bandwidth = static_cast<std::size_t>(draws.size());
    src.draws = std::move(draws);
    src.f_coeffs.resize(src.draws.size());
    for (Eigen::Index j = 0; j < src.draws.size(); ++j)
      src.f_coeffs[j] = std::pow(lambda(static_cast<std::size_t>(j + 1)), -s) * src.draws[j];
    return src;
  }
};

/// Draws X_1..X_D from the stream (seed, source tag).  Sources with the same
/// seed share their draws across smoothness values.
inline SampledSource sample_source(double s, std::size_t bandwidth, std::uint64_t seed) {
  if (bandwidth < 1) throw std::invalid_argument("bandwidth must be at least 1");
  Stream stream(seed, {stream_tag::source});
  auto src = SampledSource::from_draws(s, stream.normals(static_cast<Eigen::Index>(bandwidth)));
  src.seed = seed;
  return src;
}

/// g(xi_l) = (K f)(xi_l) = sqrt(2) sum_j (j pi)^{-2(s+1)} X_j sin(j pi xi_l).
inline Vector exact_collocation_data(const SampledSource& src, std::size_t m) {
  if (m < 1) throw std::invalid_argument("exact_collocation_data requires m >= 1");
  const SineTable table(m);
  Vector weights(src.f_coeffs.size());
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    weights[j] = sigma_continuous(static_cast<std::size_t>(j + 1)) * src.f_coeffs[j];
  Vector g(static_cast<Eigen::Index>(m));
  for (std::size_t l = 1; l <= m; ++l) {
    double acc = 0.0;
    std::size_t idx = 0;
    // Sum from the smallest terms up.
    for (std::size_t j = src.bandwidth; j >= 1; --j) {
      idx = (j * l) % table.period();
      acc += weights[static_cast<Eigen::Index>(j - 1)] * table.at(idx);
    }
    g[static_cast<Eigen::Index>(l - 1)] = std::sqrt(2.0) * acc;
  }
  return g;
}

/// <f, v_{k,m}> for k = 1..m through the aliasing rule: only j = 2t(m+1) + k
/// (sign +) and j = 2t(m+1) - k (sign -) contribute.
inline Vector project_source(const SampledSource& src, const GreenModel& model) {
  const std::size_t m = model.m();
  const std::size_t d = src.bandwidth;
  const std::size_t period = 2 * (m + 1);
  const double root = std::sqrt(static_cast<double>(m + 1));
  Vector a(static_cast<Eigen::Index>(m));
  for (std::size_t k = 1; k <= m; ++k) {
    double acc = 0.0;
    for (std::size_t j = k; j <= d; j += period)
      acc += sigma_continuous(j) * src.f_coeffs[static_cast<Eigen::Index>(j - 1)];
    for (std::size_t j = period - k; j <= d; j += period)
      acc -= sigma_continuous(j) * src.f_coeffs[static_cast<Eigen::Index>(j - 1)];
    a[static_cast<Eigen::Index>(k - 1)] = root * acc / model.sigma(k);
  }
  return a;
}

/// Coefficients <P f, v_l> of the projection of f onto span{v_{k,m}}, for
/// continuous modes l = 1..count.
inline Vector projected_mode_coefficients(const Vector& projection, const GreenModel& model,
                                          std::size_t count) {
  const std::size_t m = model.m();
  const double root = std::sqrt(static_cast<double>(m + 1));
  Vector p = Vector::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t l = 1; l <= count; ++l) {
    const std::size_t t = l / (m + 1);
    const std::size_t s = l % (m + 1);
    if (s == 0) continue;
    const std::size_t k = (t % 2 == 0) ? s : m + 1 - s;
    const double sign = (t % 2 == 0) ? 1.0 : -1.0;
    p[static_cast<Eigen::Index>(l - 1)] = sign * projection[static_cast<Eigen::Index>(k - 1)] *
                                          root * sigma_continuous(l) / model.sigma(k);
  }
  return p;
}

/// sum_{l<=D} (<P f, v_l> - f_l)^2: the discretization residual restricted to
/// the source bandwidth.
inline double discretization_residual(const SampledSource& src, const GreenModel& model,
                                      const Vector& projection) {
  const Vector p = projected_mode_coefficients(projection, model, src.bandwidth);
  return (p - src.f_coeffs).squaredNorm();
}

/// e_k for k = 0..m (square roots of the three-term decomposition).
inline std::vector<double> trial_error_profile(const ObservationCoefficients& obs,
                                               const GreenModel& model, const Vector& projection,
                                               double residual) {
  auto profile = cutoff_error_profile(obs, model.sigmas(), projection, residual);
  for (auto& v : profile) v = std::sqrt(v);
  return profile;
}

inline double trial_error(const SampledSource& src, const GreenModel& model,
                          const ObservationCoefficients& obs, std::size_t k) {
  if (k > model.m()) throw std::invalid_argument("trial_error requires k <= m");
  const Vector projection = project_source(src, model);
  const double residual = discretization_residual(src, model, projection);
  return trial_error_profile(obs, model, projection, residual)[k];
}

/// Upper bound delta_i^2 on E|e_k^2 - ||f_k - f||^2| caused by truncating the
/// mode sum at D:  (3/pi^4) D^{-3} max_{j<=m} sigma_j^{2s-2}.
inline double tail_truncation_bound(double s, std::size_t m, std::size_t bandwidth) {
  if (m < 1 || bandwidth < 1) throw std::invalid_argument("tail_truncation_bound requires m, D >= 1");
  const double exponent = 2.0 * s - 2.0;
  const std::size_t worst = exponent < 0.0 ? m : 1;
  const double d = static_cast<double>(bandwidth);
  return 3.0 / std::pow(pi, 4) / (d * d * d) * std::pow(sigma_continuous(worst), exponent);
}

struct DerivativeNorms {
  double first = 0.0;   // ||f'||
  double second = 0.0;  // ||f''||
};

/// Norms of the termwise derivatives of f = sum f_j sqrt(2) sin(j pi .).
inline DerivativeNorms derivative_norms(const SampledSource& src) {
  double d1 = 0.0, d2 = 0.0;
  for (Eigen::Index j = 0; j < src.f_coeffs.size(); ++j) {
    const double w = static_cast<double>(j + 1) * pi;
    const double f2 = src.f_coeffs[j] * src.f_coeffs[j];
    d1 += w * w * f2;
    d2 += w * w * w * w * f2;
  }
  return {std::sqrt(d1), std::sqrt(d2)};
}

/// C_s = (3^s / (2^{4s-1} pi^4))^{1/(5+4s)}.
inline double rate_constant(double s) {
  return std::pow(std::pow(3.0, s) / (std::pow(2.0, 4.0 * s - 1.0) * std::pow(pi, 4)),
                  1.0 / (5.0 + 4.0 * s));
}

struct RateBoundTerms {
  double stochastic = 0.0;
  double discretization = 0.0;
  double total() const { return stochastic + discretization; }
};

/// Convergence-rate bound for sources of smoothness s > 3/4:
///   P (delta / sqrt(m+1))^{exponent} rho^{5/(5+4s)} + spline interpolation term,
/// with P = sqrt(3) C_s^{5/2} L pi^2 / eps^4.  The exponent defaults to
/// 4s/(5+4s).
inline RateBoundTerms t0_rate_bound(double s, double rho, double delta, std::size_t m,
                                    const DerivativeNorms& derivs, const GcvParams& params = {},
                                    std::optional<double> exponent = std::nullopt) {
  params.validate();
  if (!(s > 0.75)) throw std::invalid_argument("rate bound requires s > 3/4");
  const double eps = params.epsilon;
  const double prefactor = std::sqrt(3.0) * std::pow(rate_constant(s), 2.5) *
                           bound_constant(eps) * pi * pi / std::pow(eps, 4);
  const double n1 = static_cast<double>(m + 1);
  const double expo = exponent.value_or(4.0 * s / (5.0 + 4.0 * s));
  RateBoundTerms terms;
  terms.stochastic = prefactor * std::pow(delta / std::sqrt(n1), expo) *
                     std::pow(rho, 5.0 / (5.0 + 4.0 * s));
  terms.discretization = s <= 1.25 ? derivs.first / (std::sqrt(2.0) * n1)
                                   : derivs.second / (2.0 * n1 * n1);
  return terms;
}

}  // namespace gcv::green
