// gcvcut: run the integral, deblurring, CT and verification experiments.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gcv/harness/config.hpp"
#include "gcv/harness/experiments.hpp"
#include "gcv/harness/output.hpp"
#include "gcv/harness/verify.hpp"
#include "gcv/imaging/io.hpp"

namespace {

namespace h = gcv::harness;

constexpr int exit_ok = 0;
constexpr int exit_suite_failure = 1;
constexpr int exit_config_error = 2;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::string snr;
  std::string out;
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON configuration file");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--trials", o.trials, "trials per SNR value");
  sub->add_option("--snr", o.snr, "comma-separated SNR values");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--threads", o.threads, "worker threads (0: " + std::string(h::thread_env_var) + " or all cores)");
}

h::ExperimentConfig build_config(h::Experiment e, const Overrides& o) {
  auto c = o.config_path.empty() ? h::ExperimentConfig::defaults(e) : h::load_config(o.config_path, e);
  if (o.seed) c.master_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (!o.snr.empty()) c.snr = h::parse_number_list(o.snr);
  if (!o.out.empty()) c.out_dir = o.out;
  c.validate();
  return c;
}

void print_summary(const h::ExperimentResult& r) {
  std::printf("%-8s %-10s %6s %12s %12s %12s %12s %8s %8s\n", "series", "snr", "trials", "rel_gcv", "sd",
              "rel_opt", "sd", "k_gcv", "k_opt");
  for (const auto& e : r.summary) {
    std::printf("%-8s %-10.3g %6zu %12.4e %12.4e %12.4e %12.4e %8.1f %8.1f\n",
                std::isnan(e.smoothness) ? "-" : h::format_double(e.smoothness).c_str(), e.snr, e.trials,
                e.rel_gcv.mean, e.rel_gcv.std, e.rel_opt.mean, e.rel_opt.std, e.k_gcv_median, e.k_opt_median);
  }
}

int run(h::Experiment e, const Overrides& o) {
  const auto config = build_config(e, o);
  if (e == h::Experiment::verify) {
    const auto report = h::run_verify(config);
    for (const auto& s : report.suites)
      std::printf("%-4s %-14s measured %.3e tol %.3e  %.2fs  %s\n", s.passed ? "PASS" : "FAIL", s.name.c_str(),
                  s.measured, s.tolerance, s.seconds, s.detail.c_str());
    std::filesystem::create_directories(config.out_dir);
    h::write_text(config.out_dir / "verify_report.json", h::report_json(report).dump(2) + "\n");
    return report.passed() ? exit_ok : exit_suite_failure;
  }
  h::ExperimentResult result;
  switch (e) {
    case h::Experiment::integral: result = h::run_integral(config, o.threads); break;
    case h::Experiment::deblur: result = h::run_deblur(config, o.threads); break;
    case h::Experiment::ct: result = h::run_ct(config, o.threads); break;
    case h::Experiment::verify: break;
  }
  for (const auto& path : h::write_outputs(result, config.out_dir)) std::cout << "wrote " << path.string() << '\n';
  if (config.write_images) {
    namespace im = gcv::imaging;
    if (e == h::Experiment::deblur) {
      const auto sc = h::make_deblur_scenario(config);
      im::write_pgm(config.out_dir / "deblur_truth.pgm", sc.truth);
      im::write_pgm(config.out_dir / "deblur_blurred.pgm", sc.blurred);
    } else if (e == h::Experiment::ct) {
      const auto sc = h::make_ct_scenario(config);
      im::write_pgm(config.out_dir / "ct_truth.pgm", sc.truth);
      im::write_csv(config.out_dir / "ct_sinogram.csv", im::sinogram_image(sc.op.geometry, sc.b_exact));
    }
  }
  print_summary(result);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GCV spectral cut-off experiments"};
  app.require_subcommand(1);
  Overrides o;
  auto* integral = app.add_subcommand("integral", "Green's function integral equation study");
  auto* deblur = app.add_subcommand("deblur", "Gaussian blur with reflective boundaries");
  auto* ct = app.add_subcommand("ct", "parallel-beam tomography");
  auto* verify = app.add_subcommand("verify", "closed-form and operator self-checks");
  for (auto* sub : {integral, deblur, ct, verify}) add_common(sub, o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? exit_ok : exit_config_error;
  }
  try {
    if (integral->parsed()) return run(h::Experiment::integral, o);
    if (deblur->parsed()) return run(h::Experiment::deblur, o);
    if (ct->parsed()) return run(h::Experiment::ct, o);
    return run(h::Experiment::verify, o);
  } catch (const h::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return exit_config_error;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return exit_config_error;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_suite_failure;
  }
}
