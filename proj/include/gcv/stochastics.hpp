#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "gcv/rng.hpp"
#include "gcv/spectral.hpp"

namespace gcv {

/// delta = ||g|| / (sqrt(m) * snr).
inline double snr_to_delta(const Vector& g_exact, double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
  const double norm = g_exact.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("snr is undefined for a zero signal");
  return norm / (std::sqrt(static_cast<double>(g_exact.size())) * snr);
}

inline double delta_to_snr(const Vector& g_exact, double delta) {
  return g_exact.norm() / (std::sqrt(static_cast<double>(g_exact.size())) * delta);
}

/// g + delta * eps with fresh standard normal eps.
inline Vector add_noise(const Vector& g_exact, double delta, Stream& stream) {
  if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  Vector out = g_exact;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += delta * stream.normal();
  return out;
}

/// Membership in the concentration event
///   |sum_{j=k+1}^{l} n_j^2 - (l-k) delta^2| <= eps (l-k) delta^2
/// for all t <= l <= m and 0 <= k <= l/2, checked exhaustively.
inline bool omega_membership(std::span<const double> noise_coeffs, double delta, double eps,
                             std::size_t t) {
  const std::size_t m = noise_coeffs.size();
  if (t < 1 || t > m) throw std::invalid_argument("omega_membership requires 1 <= t <= m");
  std::vector<double> prefix(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + noise_coeffs[j] * noise_coeffs[j];
  const double d2 = delta * delta;
  for (std::size_t l = t; l <= m; ++l) {
    for (std::size_t k = 0; 2 * k <= l; ++k) {
      const double width = static_cast<double>(l - k) * d2;
      if (std::abs(prefix[l] - prefix[k] - width) > eps * width) return false;
    }
  }
  return true;
}

inline bool omega_membership(const Vector& noise_coeffs, double delta, double eps, std::size_t t) {
  return omega_membership(std::span<const double>(noise_coeffs.data(), static_cast<std::size_t>(noise_coeffs.size())),
                          delta, eps, t);
}

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of p_eps(t) = (3/eps) E| t^{-1} sum_{j<=t} (eps_j^2 - 1) |
/// for standard normal eps_j.
inline MonteCarloEstimate p_eps_estimate(double eps, std::size_t t, std::size_t reps, Stream& stream) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (t < 1) throw std::invalid_argument("t must be at least 1");
  if (reps < 2) throw std::invalid_argument("reps must be at least 2");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      const double e = stream.normal();
      acc += e * e - 1.0;
    }
    const double x = std::abs(acc / static_cast<double>(t));
    const double d = x - mean;
    mean += d / static_cast<double>(r + 1);
    m2 += d * (x - mean);
  }
  const double var = m2 / static_cast<double>(reps - 1);
  return {3.0 / eps * mean, 3.0 / eps * std::sqrt(var / static_cast<double>(reps))};
}

/// p_eps at a real-valued argument: rounded down to an integer, at least 1.
inline std::size_t p_eps_argument(double t) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(t)));
}

// ---------------------------------------------------------------------------
// Descriptive statistics

struct BoxStats {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;  // ascending
};

/// Quantile by linear interpolation between order statistics (type 7).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Quartiles, whiskers reaching the most extreme samples within
/// whisker_factor box heights of the box edges, and everything beyond them.
inline BoxStats box_stats(std::span<const double> samples, double whisker_factor = 6.0) {
  if (samples.empty()) throw std::invalid_argument("box_stats of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  BoxStats b;
  b.q25 = quantile_sorted(sorted, 0.25);
  b.median = quantile_sorted(sorted, 0.5);
  b.q75 = quantile_sorted(sorted, 0.75);
  const double reach = whisker_factor * (b.q75 - b.q25);
  const double lo_limit = b.q25 - reach;
  const double hi_limit = b.q75 + reach;
  b.whisker_low = b.q25;
  b.whisker_high = b.q75;
  for (double x : sorted) {
    if (x < lo_limit || x > hi_limit) {
      b.outliers.push_back(x);
    } else {
      b.whisker_low = std::min(b.whisker_low, x);
      b.whisker_high = std::max(b.whisker_high, x);
    }
  }
  return b;
}

inline double sample_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two samples.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = sample_mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

}  // namespace gcv
