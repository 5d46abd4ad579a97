#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcv/dense.hpp"
#include "gcv/green.hpp"
#include "gcv/harness/config.hpp"
#include "gcv/harness/parallel.hpp"
#include "gcv/imaging/blur.hpp"
#include "gcv/imaging/phantom.hpp"
#include "gcv/imaging/radon.hpp"
#include "gcv/rng.hpp"
#include "gcv/spectral.hpp"
#include "gcv/stochastics.hpp"

namespace gcv::harness {

inline constexpr double not_available = std::numeric_limits<double>::quiet_NaN();

struct TrialRecord {
  std::size_t trial = 0;
  double snr = 0.0;
  double delta = 0.0;
  std::size_t k_gcv = 0;
  std::size_t k_opt = 0;
  double e_gcv = 0.0;
  double e_opt = 0.0;
  double rel_gcv = 0.0;
  double rel_opt = 0.0;
  // integral experiment only
  int omega_member = -1;
  long t_oracle = -1;
  long s_oracle = -1;
  double l2_error = not_available;  // ||f_{k_gcv} - P f||
  double l2_bound = not_available;  // NaN when the bound index leaves the spectrum
  double wall_time = 0.0;

  bool bound_excluded() const { return s_oracle >= 0 && std::isnan(l2_bound); }
};

struct SeriesStats {
  BoxStats box;
  double mean = 0.0;
  double std = 0.0;
};

inline SeriesStats series_stats(std::span<const double> values) {
  return {box_stats(values), sample_mean(values), sample_std(values)};
}

struct SummaryEntry {
  std::size_t series = 0;
  double smoothness = not_available;
  double snr = 0.0;
  std::size_t trials = 0;
  SeriesStats rel_gcv, rel_opt, abs_gcv, abs_opt;
  double k_gcv_median = 0.0;
  double k_opt_median = 0.0;
  // integral only
  double omega_fraction = not_available;
  std::size_t l2_within = 0;
  std::size_t l2_excluded = 0;
};

/// Records of one series (one smoothness for the integral experiment, the
/// single scenario for imaging), ordered by (snr index, trial).
struct Series {
  double smoothness = not_available;
  double solution_norm = 0.0;
  std::vector<TrialRecord> records;
};

struct ExperimentResult {
  Experiment experiment = Experiment::integral;
  ExperimentConfig config;
  std::vector<Series> series;
  std::vector<SummaryEntry> summary;
  std::size_t rank = 0;  // stored singular values of the operator
};

/// Aggregates consecutive records with equal snr, in order.
inline std::vector<SummaryEntry> summarize(const std::vector<Series>& series) {
  std::vector<SummaryEntry> out;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& recs = series[si].records;
    std::size_t begin = 0;
    while (begin < recs.size()) {
      std::size_t end = begin;
      while (end < recs.size() && recs[end].snr == recs[begin].snr) ++end;
      std::vector<double> rg, ro, ag, ao, kg, ko;
      std::size_t omega = 0, omega_known = 0;
      SummaryEntry e;
      for (std::size_t r = begin; r < end; ++r) {
        const auto& t = recs[r];
        rg.push_back(t.rel_gcv);
        ro.push_back(t.rel_opt);
        ag.push_back(t.e_gcv);
        ao.push_back(t.e_opt);
        kg.push_back(static_cast<double>(t.k_gcv));
        ko.push_back(static_cast<double>(t.k_opt));
        if (t.omega_member >= 0) {
          ++omega_known;
          omega += static_cast<std::size_t>(t.omega_member);
        }
        if (t.bound_excluded()) ++e.l2_excluded;
        else if (!std::isnan(t.l2_bound) && t.l2_error <= t.l2_bound) ++e.l2_within;
      }
      e.series = si;
      e.smoothness = series[si].smoothness;
      e.snr = recs[begin].snr;
      e.trials = end - begin;
      e.rel_gcv = series_stats(rg);
      e.rel_opt = series_stats(ro);
      e.abs_gcv = series_stats(ag);
      e.abs_opt = series_stats(ao);
      e.k_gcv_median = box_stats(kg).median;
      e.k_opt_median = box_stats(ko).median;
      if (omega_known > 0) e.omega_fraction = static_cast<double>(omega) / static_cast<double>(omega_known);
      out.push_back(std::move(e));
      begin = end;
    }
  }
  return out;
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::uint64_t experiment_tag(Experiment e) { return static_cast<std::uint64_t>(e) + 1; }

/// Fills k_gcv, k_opt and the error fields from an error profile.
inline void fill_errors(TrialRecord& rec, const ObservationCoefficients& obs, const GcvParams& params,
                        const std::vector<double>& profile, double norm) {
  rec.k_gcv = select_gcv_index(obs, params);
  rec.k_opt = optimal_index(profile);
  rec.e_gcv = profile[rec.k_gcv];
  rec.e_opt = profile[rec.k_opt];
  rec.rel_gcv = rec.e_gcv / norm;
  rec.rel_opt = rec.e_opt / norm;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Integral equation

/// Everything about one smoothness level that stays fixed across trials.
struct IntegralSetup {
  double s = 0.0;
  green::GreenModel model;
  green::GreenSystem system;
  green::SampledSource source;
  Vector g_exact;
  Vector g_coeffs;    // exact data in the left basis
  Vector projection;  // <f, v_{k,m}>
  double residual = 0.0;

  IntegralSetup(double s_, std::size_t m, std::size_t bandwidth, std::uint64_t seed)
      : s(s_),
        model(m),
        system(model.system()),
        source(green::sample_source(s_, bandwidth, seed)),
        g_exact(green::exact_collocation_data(source, m)),
        g_coeffs(system.left.coefficients(g_exact)),
        projection(green::project_source(source, model)),
        residual(green::discretization_residual(source, model, projection)) {}
};

/// One noisy realization of the integral experiment.
inline TrialRecord integral_trial(const IntegralSetup& setup, const GcvParams& params, double snr,
                                  Stream& stream) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.snr = snr;
  rec.delta = snr_to_delta(setup.g_exact, snr);
  const auto m = static_cast<Eigen::Index>(setup.model.m());
  const Vector noise = rec.delta * stream.normals(m);
  const Vector noise_coeffs = setup.system.left.coefficients(noise);

  ObservationCoefficients obs;
  obs.m = setup.model.m();
  obs.coeffs = setup.g_coeffs + noise_coeffs;
  obs.residual_energy = 0.0;
  obs.delta_true = rec.delta;

  const auto profile = green::trial_error_profile(obs, setup.model, setup.projection, setup.residual);
  detail::fill_errors(rec, obs, params, profile, setup.source.norm());

  const auto& sig = setup.model.sigmas();
  const auto oracles = oracle_indices(setup.projection, sig, rec.delta);
  rec.t_oracle = static_cast<long>(oracles.t);
  rec.s_oracle = static_cast<long>(oracles.s);
  rec.omega_member =
      omega_membership(noise_coeffs, rec.delta, params.epsilon, std::max<std::size_t>(1, oracles.t)) ? 1 : 0;
  rec.l2_error = std::sqrt(cutoff_error_profile(obs, sig, setup.projection, 0.0)[rec.k_gcv]);
  try {
    rec.l2_bound = theorem_l2_bound(oracles.s, rec.delta, sig, params);
  } catch (const BoundIndexOverflow&) {
    rec.l2_bound = not_available;
  }
  rec.wall_time = detail::seconds_since(start);
  return rec;
}

inline GcvParams gcv_params(const ExperimentConfig& c) {
  GcvParams p;
  p.epsilon = c.epsilon;
  p.k_max_fraction = c.k_max_fraction;
  p.validate();
  return p;
}

inline ExperimentResult run_integral(const ExperimentConfig& config, unsigned threads = 0) {
  config.validate();
  const GcvParams params = gcv_params(config);
  ExperimentResult result{Experiment::integral, config, {}, {}, config.m};
  const unsigned workers = resolve_threads(threads, config.threads);
  for (std::size_t si = 0; si < config.smoothness.size(); ++si) {
    const IntegralSetup setup(config.smoothness[si], config.m, config.bandwidth, config.master_seed);
    Series series{setup.s, setup.source.norm(), {}};
    const std::size_t per_snr = config.trials;
    series.records.resize(config.snr.size() * per_snr);
    parallel_for(series.records.size(), workers, [&](std::size_t idx) {
      const std::size_t snr_idx = idx / per_snr, trial = idx % per_snr;
      Stream stream(config.master_seed,
                    {stream_tag::noise, detail::experiment_tag(Experiment::integral), si, snr_idx, trial});
      auto rec = integral_trial(setup, params, config.snr[snr_idx], stream);
      rec.trial = trial;
      series.records[idx] = rec;
    });
    result.series.push_back(std::move(series));
  }
  result.summary = summarize(result.series);
  return result;
}

// ---------------------------------------------------------------------------
// Imaging

/// One noisy realization for an operator with a known exact solution:
/// exact_coeffs are the right-basis coordinates of the true image.
template <LeftBasis Left, class Right>
TrialRecord imaging_trial(const SingularSystem<Left, Right>& system, const Vector& b_exact,
                          const Vector& exact_coeffs, double solution_norm, const GcvParams& params,
                          double snr, Stream& stream) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.snr = snr;
  rec.delta = snr_to_delta(b_exact, snr);
  const Vector data = add_noise(b_exact, rec.delta, stream);
  ObservationCoefficients obs = project_observations(data, system);
  obs.delta_true = rec.delta;
  auto profile = cutoff_error_profile(obs, system.sigmas, exact_coeffs, 0.0);
  for (auto& v : profile) v = std::sqrt(v);
  detail::fill_errors(rec, obs, params, profile, solution_norm);
  rec.wall_time = detail::seconds_since(start);
  return rec;
}

template <LeftBasis Left, class Right>
std::vector<TrialRecord> run_imaging_trials(const ExperimentConfig& config, Experiment which,
                                            const SingularSystem<Left, Right>& system, const Vector& b_exact,
                                            const Vector& exact_coeffs, double solution_norm, unsigned threads) {
  const GcvParams params = gcv_params(config);
  const std::size_t per_snr = config.trials;
  std::vector<TrialRecord> records(config.snr.size() * per_snr);
  parallel_for(records.size(), resolve_threads(threads, config.threads), [&](std::size_t idx) {
    const std::size_t snr_idx = idx / per_snr, trial = idx % per_snr;
    Stream stream(config.master_seed, {stream_tag::noise, detail::experiment_tag(which), snr_idx, trial});
    auto rec = imaging_trial(system, b_exact, exact_coeffs, solution_norm, params, config.snr[snr_idx], stream);
    rec.trial = trial;
    records[idx] = rec;
  });
  return records;
}

struct DeblurScenario {
  imaging::PsfKernel psf;
  imaging::BlurDecomposition decomposition;
  imaging::Image truth;
  imaging::Image blurred;
  Vector b_exact;
  Vector exact_coeffs;
};

inline DeblurScenario make_deblur_scenario(const ExperimentConfig& c) {
  const int padded = c.n + 2 * c.padding;
  auto psf = imaging::gaussian_psf(c.psf_sigma, c.psf_size);
  imaging::StarFieldParams stars;
  stars.margin = c.padding + c.resolved_sky_margin();
  auto pair = imaging::make_inverse_crime_free_data(imaging::star_field(padded, c.master_seed, stars), psf, c.n);
  auto dec = imaging::dct_spectral_decomposition(psf, c.n);
  Vector b = imaging::vectorize(pair.blurred);
  Vector x = dec.system.right.coefficients(imaging::vectorize(pair.truth));
  return {std::move(psf), std::move(dec), std::move(pair.truth), std::move(pair.blurred), std::move(b), std::move(x)};
}

inline ExperimentResult run_deblur(const ExperimentConfig& config, unsigned threads = 0) {
  config.validate();
  const auto sc = make_deblur_scenario(config);
  ExperimentResult result{Experiment::deblur, config, {}, {}, sc.decomposition.system.rank()};
  Series series{not_available, sc.truth.norm(), {}};
  series.records = run_imaging_trials(config, Experiment::deblur, sc.decomposition.system, sc.b_exact,
                                      sc.exact_coeffs, series.solution_norm, threads);
  result.series.push_back(std::move(series));
  result.summary = summarize(result.series);
  return result;
}

struct CtScenario {
  imaging::RadonOperator op;
  DenseSystem system;
  imaging::Image truth;
  Vector b_exact;
  Vector exact_coeffs;
};

/// Data come either from the phantom sampled on a `refinement` times finer
/// grid along the same rays, with the truth its block average, or (refinement
/// 0) from analytic line integrals with the pixel-averaged phantom as truth.
inline CtScenario make_ct_scenario(const ExperimentConfig& c) {
  auto geometry = imaging::SinogramGeometry::uniform(c.n, c.angles);
  auto op = imaging::radon_build(geometry);
  auto system = make_dense_system(dense_svd(Matrix(op.matrix)));
  imaging::Image truth;
  Vector b;
  if (c.refinement == 0) {
    truth = imaging::rasterize(c.phantom, c.n, c.supersample);
    b = imaging::analytic_sinogram(c.phantom, geometry);
  } else {
    const auto fine = imaging::rasterize(c.phantom, c.n * c.refinement, c.supersample);
    truth = imaging::block_average(fine, c.refinement);
    b = imaging::fine_grid_sinogram(geometry, fine, c.refinement);
  }
  Vector x = system.right.coefficients(imaging::vectorize(truth));
  return {std::move(op), std::move(system), std::move(truth), std::move(b), std::move(x)};
}

inline ExperimentResult run_ct(const ExperimentConfig& config, unsigned threads = 0) {
  config.validate();
  const auto sc = make_ct_scenario(config);
  ExperimentResult result{Experiment::ct, config, {}, {}, sc.system.rank()};
  Series series{not_available, sc.truth.norm(), {}};
  series.records = run_imaging_trials(config, Experiment::ct, sc.system, sc.b_exact, sc.exact_coeffs,
                                      series.solution_norm, threads);
  result.series.push_back(std::move(series));
  result.summary = summarize(result.series);
  return result;
}

}  // namespace gcv::harness
