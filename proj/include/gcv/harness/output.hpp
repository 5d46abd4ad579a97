#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcv/harness/experiments.hpp"

namespace gcv::harness {

/// Round-trip decimal text of a double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "s0.25" style label of a series, empty for single-series experiments.
inline std::string series_label(const Series& s) {
  if (std::isnan(s.smoothness)) return "";
  return "_s" + format_double(s.smoothness);
}

inline std::string records_csv(const Series& series, Experiment experiment) {
  const bool integral = experiment == Experiment::integral;
  std::ostringstream out;
  out << "snr,trial,delta,k_gcv,k_opt,e_gcv,e_opt,rel_gcv,rel_opt";
  if (integral) out << ",omega_member,t_oracle,s_oracle,l2_error,l2_bound";
  out << '\n';
  for (const auto& r : series.records) {
    out << format_double(r.snr) << ',' << r.trial << ',' << format_double(r.delta) << ',' << r.k_gcv << ','
        << r.k_opt << ',' << format_double(r.e_gcv) << ',' << format_double(r.e_opt) << ','
        << format_double(r.rel_gcv) << ',' << format_double(r.rel_opt);
    if (integral)
      out << ',' << r.omega_member << ',' << r.t_oracle << ',' << r.s_oracle << ',' << format_double(r.l2_error)
          << ',' << format_double(r.l2_bound);
    out << '\n';
  }
  return out.str();
}

/// Wall times per trial, kept out of the record files.
inline std::string timings_csv(const Series& series) {
  std::ostringstream out;
  out << "snr,trial,wall_time\n";
  for (const auto& r : series.records)
    out << format_double(r.snr) << ',' << r.trial << ',' << format_double(r.wall_time) << '\n';
  return out.str();
}

namespace detail {

inline nlohmann::json number(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

inline nlohmann::json stats_json(const SeriesStats& s) {
  return {{"mean", s.mean},
          {"std", s.std},
          {"q25", s.box.q25},
          {"median", s.box.median},
          {"q75", s.box.q75},
          {"whisker_low", s.box.whisker_low},
          {"whisker_high", s.box.whisker_high},
          {"outliers", s.box.outliers}};
}

}  // namespace detail

inline nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : result.summary) {
    nlohmann::json j{{"series", e.series},
                     {"smoothness", detail::number(e.smoothness)},
                     {"snr", e.snr},
                     {"trials", e.trials},
                     {"rel_gcv", detail::stats_json(e.rel_gcv)},
                     {"rel_opt", detail::stats_json(e.rel_opt)},
                     {"abs_gcv", detail::stats_json(e.abs_gcv)},
                     {"abs_opt", detail::stats_json(e.abs_opt)},
                     {"k_gcv_median", e.k_gcv_median},
                     {"k_opt_median", e.k_opt_median}};
    if (result.experiment == Experiment::integral) {
      j["omega_fraction"] = detail::number(e.omega_fraction);
      j["l2_within"] = e.l2_within;
      j["l2_excluded"] = e.l2_excluded;
    }
    entries.push_back(std::move(j));
  }
  const auto& c = result.config;
  nlohmann::json config{{"trials", c.trials},  {"master_seed", c.master_seed},
                        {"epsilon", c.epsilon}, {"k_max_fraction", c.k_max_fraction},
                        {"snr", c.snr}};
  switch (result.experiment) {
    case Experiment::integral:
      config["m"] = c.m;
      config["D"] = c.bandwidth;
      config["smoothness"] = c.smoothness;
      break;
    case Experiment::deblur:
      config["n"] = c.n;
      config["psf_sigma"] = c.psf_sigma;
      config["psf_size"] = c.psf_size;
      config["padding"] = c.padding;
      config["sky_margin"] = c.resolved_sky_margin();
      break;
    case Experiment::ct:
      config["n"] = c.n;
      config["angles"] = c.angles;
      config["supersample"] = c.supersample;
      config["refinement"] = c.refinement;
      break;
    case Experiment::verify:
      break;
  }
  nlohmann::json norms = nlohmann::json::array();
  for (const auto& s : result.series) norms.push_back(s.solution_norm);
  return {{"experiment", to_string(result.experiment)},
          {"config", config},
          {"rank", result.rank},
          {"solution_norms", norms},
          {"summary", entries}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Writes <exp><label>.csv per series, <exp>_summary.json, and timing files.
/// Returns the paths of the reproducible outputs.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem = to_string(result.experiment);
  std::vector<std::filesystem::path> written;
  for (const auto& s : result.series) {
    const auto csv = dir / (stem + series_label(s) + ".csv");
    write_text(csv, records_csv(s, result.experiment));
    write_text(dir / (stem + series_label(s) + "_timings.csv"), timings_csv(s));
    written.push_back(csv);
  }
  const auto json = dir / (stem + "_summary.json");
  write_text(json, summary_json(result).dump(2) + "\n");
  written.push_back(json);
  return written;
}

}  // namespace gcv::harness
