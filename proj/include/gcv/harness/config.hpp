#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcv/imaging/phantom.hpp"

namespace gcv::harness {

enum class Experiment { integral, deblur, ct, verify };

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::integral: return "integral";
    case Experiment::deblur: return "deblur";
    case Experiment::ct: return "ct";
    case Experiment::verify: return "verify";
  }
  return "unknown";
}

/// Thrown for malformed or out-of-range configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Experiment parse_experiment(const std::string& name) {
  if (name == "integral") return Experiment::integral;
  if (name == "deblur") return Experiment::deblur;
  if (name == "ct") return Experiment::ct;
  if (name == "verify") return Experiment::verify;
  throw ConfigError("unknown experiment '" + name + "'");
}

inline constexpr int max_dense_ct_size = 64;

struct ExperimentConfig {
  Experiment experiment = Experiment::integral;

  // shared
  std::vector<double> snr;
  std::size_t trials = 1;
  std::uint64_t master_seed = 1;
  double epsilon = 1.0 / 12.0;
  double k_max_fraction = 0.5;
  std::filesystem::path out_dir = "results";
  unsigned threads = 0;

  // integral
  std::size_t m = 512;
  std::size_t bandwidth = 16384;
  std::vector<double> smoothness{0.25, 0.75, 1.25};

  // imaging
  int n = 256;
  double psf_sigma = 4.0;
  int psf_size = 255;
  int padding = 128;
  int sky_margin = -1;  // dark border inside the crop; negative: ceil(4 psf_sigma)
  int angles = 60;
  int supersample = 8;
  int refinement = 2;  // ct data grid refinement; 0 selects analytic line integrals
  std::vector<imaging::Ellipse> phantom = imaging::modified_shepp_logan();
  bool write_images = false;

  // verify
  std::size_t verify_m = 16;
  double perturb_sigma = 0.0;

  /// Defaults for one experiment; every field can be overridden afterwards.
  static ExperimentConfig defaults(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
      case Experiment::integral:
        c.snr = {1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
        c.trials = 200;
        break;
      case Experiment::deblur:
        c.snr = {1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
        c.trials = 1000;
        break;
      case Experiment::ct:
        c.snr = {1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3};
        c.trials = 1000;
        c.n = 32;
        break;
      case Experiment::verify:
        c.trials = 1;
        break;
    }
    return c;
  }

  int resolved_sky_margin() const {
    return sky_margin >= 0 ? sky_margin : static_cast<int>(std::ceil(4.0 * psf_sigma));
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    for (double v : snr)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("snr values must be positive and finite");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (!(k_max_fraction > 0.0 && k_max_fraction < 1.0)) throw ConfigError("k_max_fraction must lie in (0, 1)");
    switch (experiment) {
      case Experiment::integral:
        if (snr.empty()) throw ConfigError("snr list is empty");
        if (m < 2) throw ConfigError("m must be at least 2");
        if (bandwidth < m) throw ConfigError("bandwidth D must be at least m");
        if (smoothness.empty()) throw ConfigError("smoothness list is empty");
        for (double s : smoothness)
          if (!(s > 0.0)) throw ConfigError("smoothness values must be positive");
        break;
      case Experiment::deblur:
        if (snr.empty()) throw ConfigError("snr list is empty");
        if (n < 2) throw ConfigError("n must be at least 2");
        if (psf_size < 1 || psf_size % 2 == 0) throw ConfigError("psf_size must be odd and positive");
        if (!(psf_sigma > 0.0)) throw ConfigError("psf_sigma must be positive");
        if (padding < (psf_size - 1) / 2) throw ConfigError("padding must be at least (psf_size - 1) / 2");
        if (2 * resolved_sky_margin() >= n) throw ConfigError("sky_margin leaves no room for the star field");
        break;
      case Experiment::ct:
        if (snr.empty()) throw ConfigError("snr list is empty");
        if (n < 2) throw ConfigError("n must be at least 2");
        if (n > max_dense_ct_size)
          throw ConfigError("ct uses a dense SVD; n = " + std::to_string(n) + " exceeds " +
                            std::to_string(max_dense_ct_size) + ", reduce n");
        if (angles < 1) throw ConfigError("angles must be at least 1");
        if (supersample < 1) throw ConfigError("supersample must be at least 1");
        if (refinement < 0) throw ConfigError("refinement must be nonnegative");
        break;
      case Experiment::verify:
        if (verify_m < 1 || verify_m > 64) throw ConfigError("verify_m must lie in [1, 64]");
        break;
    }
  }
};

namespace detail {

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Overlays the keys present in `j` onto `c`.  Unknown keys are rejected.
inline void apply_json(ExperimentConfig& c, const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "experiment", "snr",        "trials",    "master_seed", "epsilon",      "k_max_fraction",
      "out_dir",    "threads",    "m",         "D",           "smoothness",   "n",
      "psf_sigma",  "psf_size",   "padding",   "sky_margin",   "angles",      "supersample",  "refinement", "phantom",
      "write_images", "verify_m", "perturb_sigma"};
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown configuration key '" + key + "'");
  detail::read_field(j, "snr", c.snr);
  detail::read_field(j, "trials", c.trials);
  detail::read_field(j, "master_seed", c.master_seed);
  detail::read_field(j, "epsilon", c.epsilon);
  detail::read_field(j, "k_max_fraction", c.k_max_fraction);
  if (j.contains("out_dir")) {
    std::string p;
    detail::read_field(j, "out_dir", p);
    c.out_dir = p;
  }
  detail::read_field(j, "threads", c.threads);
  detail::read_field(j, "m", c.m);
  detail::read_field(j, "D", c.bandwidth);
  detail::read_field(j, "smoothness", c.smoothness);
  detail::read_field(j, "n", c.n);
  detail::read_field(j, "psf_sigma", c.psf_sigma);
  detail::read_field(j, "psf_size", c.psf_size);
  detail::read_field(j, "padding", c.padding);
  detail::read_field(j, "sky_margin", c.sky_margin);
  detail::read_field(j, "angles", c.angles);
  detail::read_field(j, "supersample", c.supersample);
  detail::read_field(j, "refinement", c.refinement);
  detail::read_field(j, "write_images", c.write_images);
  detail::read_field(j, "verify_m", c.verify_m);
  detail::read_field(j, "perturb_sigma", c.perturb_sigma);
  if (j.contains("phantom")) {
    const auto& table = j.at("phantom");
    if (!table.is_array()) throw ConfigError("phantom must be an array of ellipses");
    c.phantom.clear();
    for (const auto& row : table) {
      if (!row.is_array() || row.size() != 6)
        throw ConfigError("phantom rows are [intensity, semi_x, semi_y, centre_x, centre_y, angle_deg]");
      try {
        c.phantom.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>(),
                             row[3].get<double>(), row[4].get<double>(), row[5].get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad phantom row: ") + e.what());
      }
    }
  }
}

/// Reads a config file.  The experiment named in the file (if any) must match
/// `experiment`; defaults for that experiment fill the remaining fields.
inline ExperimentConfig load_config(const std::filesystem::path& path, Experiment experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (j.contains("experiment") && parse_experiment(j.at("experiment").get<std::string>()) != experiment)
    throw ConfigError("config file is for experiment '" + j.at("experiment").get<std::string>() + "'");
  auto c = ExperimentConfig::defaults(experiment);
  apply_json(c, j);
  return c;
}

/// Comma-separated list of positive numbers, e.g. "1e2,1e3".
inline std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + item + "' as a number");
    }
    if (used != item.size()) throw ConfigError("cannot parse '" + item + "' as a number");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace gcv::harness
