#pragma once

// Self-check suites run by the `verify` subcommand.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include "gcv/dense.hpp"
#include "gcv/green.hpp"
#include "gcv/harness/config.hpp"
#include "gcv/imaging/blur.hpp"
#include "gcv/imaging/radon.hpp"
#include "gcv/rng.hpp"
#include "gcv/stochastics.hpp"

namespace gcv::harness {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed deviation
  double tolerance = 0.0;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;

  bool passed() const {
    for (const auto& s : suites)
      if (!s.passed) return false;
    return true;
  }
};

namespace verify {

/// Closed-form sigma_{k,m}^2 (optionally scaled by 1 + perturb) against the
/// eigenvalues of T_m from the Jacobi solver, relative error, m = 1, 2, 4, ..
inline SuiteResult eigensystem(std::size_t max_m, double perturb) {
  SuiteResult r{"eigensystem", false, 0.0, 1e-9, "", 0.0};
  for (std::size_t m = 1; m <= max_m; m *= 2) {
    const auto eig = symmetric_eigendecomposition(green::build_matrices(m).t);
    for (std::size_t k = 1; k <= m; ++k) {
      const double sigma = green::discrete_singular_value(k, m) * (1.0 + perturb);
      const double ev = eig.values[static_cast<Eigen::Index>(k - 1)];
      r.measured = std::max(r.measured, std::abs(sigma * sigma - ev) / std::abs(ev));
    }
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = "max relative deviation of sigma_{k,m}^2 from eig(T_m), m <= " + std::to_string(max_m);
  return r;
}

/// Discrete sine sums against their case classification, plus the
/// eigen-relations of S_m, R_m and the Laplacian stencil on z_{k,m}.
inline SuiteResult identities(std::size_t max_m) {
  SuiteResult r{"identities", false, 0.0, 1e-10, "", 0.0};
  const double pi = std::numbers::pi;
  for (std::size_t m = 1; m <= max_m; ++m) {
    const double n1 = static_cast<double>(m + 1);
    for (std::size_t j = 1; j <= 5 * (m + 1); ++j)
      for (std::size_t k = 1; k <= m; ++k) {
        double sum = 0.0;
        for (std::size_t l = 1; l <= m; ++l)
          sum += std::sin(pi * static_cast<double>(j * l) / n1) * std::sin(pi * static_cast<double>(k * l) / n1);
        r.measured = std::max(r.measured, std::abs(sum - green::trig_orthogonality(j, k, m)));
      }
    const auto mats = green::build_matrices(m);
    const green::GreenModel model(m);
    for (std::size_t k = 1; k <= m; ++k) {
      const Vector z = model.z_vector(k);
      const double mu = green::s_matrix_eigenvalue(k, m);
      const double rho = green::r_matrix_eigenvalue(k, m);
      const double x = pi * static_cast<double>(k) / (2.0 * n1);
      const double lap = 4.0 * std::sin(x) * std::sin(x);
      r.measured = std::max(r.measured, (mats.s * z - mu * z).norm() / std::abs(mu));
      r.measured = std::max(r.measured, (mats.r * z - rho * z).norm() / rho);
      r.measured = std::max(r.measured, (mats.delta * z - lap * z).norm() / lap);
      const double sigma = green::discrete_singular_value(k, m);
      r.measured = std::max(r.measured, std::abs(mu * mu * rho / (6.0 * n1) - sigma * sigma) / (sigma * sigma));
    }
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = "sine-sum cases and S/R/Laplacian eigen-relations, m <= " + std::to_string(max_m);
  return r;
}

/// <v_j, v_{k,m}> by Gauss-Kronrod quadrature on a subdivision of the kinks
/// of the piecewise linear v_{k,m}, against the closed-form rule.
inline SuiteResult cross_gram_quadrature(std::size_t max_m, std::size_t max_j) {
  SuiteResult r{"cross_gram", false, 0.0, 1e-8, "", 0.0};
  using boost::math::quadrature::gauss_kronrod;
  const double pi = std::numbers::pi;
  for (std::size_t m = 1; m <= max_m; ++m) {
    const green::GreenModel model(m);
    const auto sys = model.system();
    const double n1 = static_cast<double>(m + 1);
    for (std::size_t k = 1; k <= m; ++k) {
      const Vector c = sys.right.expansion(static_cast<Eigen::Index>(k - 1));
      auto vkm = [&](double y) {
        double acc = 0.0;
        for (Eigen::Index l = 0; l < c.size(); ++l)
          acc += c[l] * green::kernel_value(static_cast<double>(l + 1) / n1, y);
        return acc;
      };
      for (std::size_t j = 1; j <= max_j; ++j) {
        auto f = [&](double y) { return std::sqrt(2.0) * std::sin(pi * static_cast<double>(j) * y) * vkm(y); };
        double integral = 0.0;
        const std::size_t pieces = 8 * (m + 1);
        for (std::size_t seg = 0; seg < pieces; ++seg)
          integral += gauss_kronrod<double, 31>::integrate(f, static_cast<double>(seg) / static_cast<double>(pieces),
                                                           static_cast<double>(seg + 1) / static_cast<double>(pieces),
                                                           0, 0.0);
        const double expect = green::cross_gram(j, k, m);
        r.measured = std::max(r.measured, std::abs(integral - expect) / std::max(1.0, std::abs(expect)));
      }
    }
  }
  r.passed = r.measured <= r.tolerance;
  r.detail = "quadrature vs closed form, j <= " + std::to_string(max_j) + ", m <= " + std::to_string(max_m);
  return r;
}

/// Monte-Carlo p_eps(t) against its normal approximation (3/eps) 2/sqrt(pi t),
/// and the frequency of the concentration event against 1 - p_eps.
inline SuiteResult concentration(std::uint64_t seed) {
  SuiteResult r{"concentration", false, 0.0, 0.0, "", 0.0};
  const double eps = 1.0 / 12.0;
  Stream stream(seed, {stream_tag::monte_carlo, 1});
  const std::size_t t = 1000;
  const auto est = p_eps_estimate(eps, t, 4000, stream);
  const double clt = 3.0 / eps * 2.0 / std::sqrt(std::numbers::pi * static_cast<double>(t));
  const double dev = std::abs(est.value - clt);
  r.tolerance = 4.0 * est.std_error + 0.02 * clt;
  r.measured = dev;

  const std::size_t m = 256, runs = 1000, event_t = 256;
  std::size_t hits = 0;
  for (std::size_t run = 0; run < runs; ++run) {
    const Vector noise = stream.normals(static_cast<Eigen::Index>(m));
    hits += omega_membership(noise, 1.0, eps, event_t) ? 1 : 0;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(runs);
  const auto bound_t = p_eps_argument(2.0 / 3.0 * eps / (1.0 + eps) * static_cast<double>(event_t));
  const auto p = p_eps_estimate(eps, bound_t, 4000, stream);
  const bool event_ok = freq >= 1.0 - p.value;
  r.passed = dev <= r.tolerance && event_ok;
  r.detail = "p_eps(1000) = " + std::to_string(est.value) + " vs " + std::to_string(clt) +
             "; Omega frequency " + std::to_string(freq) + " >= " + std::to_string(1.0 - p.value);
  return r;
}

/// Chord length of the line {x cos + y sin = s} through [-h, h]^2 from the
/// intersections with the four edges.
inline double square_chord(double nx, double ny, double s, double h) {
  std::vector<std::pair<double, double>> pts;
  for (double edge : {-h, h}) {
    if (ny != 0.0) {
      const double y = (s - edge * nx) / ny;
      if (y >= -h - 1e-12 && y <= h + 1e-12) pts.emplace_back(edge, y);
    }
    if (nx != 0.0) {
      const double x = (s - edge * ny) / nx;
      if (x >= -h - 1e-12 && x <= h + 1e-12) pts.emplace_back(x, edge);
    }
  }
  double best = 0.0;
  for (const auto& a : pts)
    for (const auto& b : pts) best = std::max(best, std::hypot(a.first - b.first, a.second - b.second));
  return best;
}

/// Blur: cosine diagonalization vs direct convolution, sparse rows vs direct
/// convolution.  Radon: row sums vs chord lengths, adjoint identity.
inline SuiteResult operators(std::uint64_t seed) {
  SuiteResult r{"operators", false, 0.0, 1e-8, "", 0.0};
  Stream stream(seed, {stream_tag::monte_carlo, 2});
  const int n = 8;
  const auto psf = imaging::gaussian_psf(1.0, 5);
  const auto dec = imaging::dct_spectral_decomposition(psf, n);
  const auto a = imaging::blur_matrix(n, n, psf, imaging::Boundary::reflective);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = stream.normals(n * n);
    const Vector direct = imaging::vectorize(
        imaging::apply_blur_direct(imaging::devectorize(x, n, n), psf, imaging::Boundary::reflective));
    r.measured = std::max(r.measured, (dec.apply(x) - direct).norm() / direct.norm());
    r.measured = std::max(r.measured, (a * x - direct).norm() / direct.norm());
  }
  const auto geo = imaging::SinogramGeometry::uniform(n, 24);
  const auto op = imaging::radon_build(geo);
  for (Eigen::Index alpha = 0; alpha < op.rows(); ++alpha) {
    const auto ray = op.ray(alpha);
    const double chord = square_chord(ray.nx, ray.ny, ray.s, 0.5 * n);
    r.measured = std::max(r.measured, std::abs(op.matrix.row(alpha).sum() - chord));
  }
  const Vector x = stream.normals(n * n);
  const Vector y = stream.normals(op.rows());
  const double lhs = (op.matrix * x).dot(y);
  const double rhs = x.dot(op.matrix.transpose() * y);
  r.measured = std::max(r.measured, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  r.passed = r.measured <= r.tolerance;
  r.detail = "blur diagonalization, blur rows, radon chord sums and adjoint";
  return r;
}

template <class F>
SuiteResult timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r = f();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace verify

inline VerifyReport run_verify(const ExperimentConfig& config) {
  config.validate();
  VerifyReport report;
  const std::size_t m = config.verify_m;
  report.suites.push_back(verify::timed([&] { return verify::eigensystem(m, config.perturb_sigma); }));
  report.suites.push_back(verify::timed([&] { return verify::identities(std::min<std::size_t>(m, 20)); }));
  report.suites.push_back(verify::timed([&] { return verify::cross_gram_quadrature(m, 50); }));
  report.suites.push_back(verify::timed([&] { return verify::concentration(config.master_seed); }));
  report.suites.push_back(verify::timed([&] { return verify::operators(config.master_seed); }));
  return report;
}

inline nlohmann::json report_json(const VerifyReport& report) {
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& s : report.suites)
    suites.push_back({{"name", s.name},
                      {"passed", s.passed},
                      {"measured", s.measured},
                      {"tolerance", s.tolerance},
                      {"detail", s.detail}});
  return {{"experiment", "verify"}, {"passed", report.passed()}, {"suites", suites}};
}

}  // namespace gcv::harness
