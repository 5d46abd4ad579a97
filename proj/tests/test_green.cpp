#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <gtest/gtest.h>

#include "gcv/dense.hpp"
#include "gcv/green.hpp"
#include "gcv/harness/experiments.hpp"

using namespace gcv;
using green::pi;
using boost::math::quadrature::gauss;

namespace {

// Adaptive Gauss-Kronrod over [a, b] split into `pieces` equal parts.
template <class F>
double integrate(F f, double a, double b, int pieces = 1) {
  double acc = 0.0;
  pieces *= 16;
  const double h = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) acc += gauss<double, 30>::integrate(f, a + p * h, a + (p + 1) * h);
  return acc;
}

// f(y) = sum_j f_j sqrt(2) sin(j pi y).
double source_value(const green::SampledSource& src, double y) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < src.f_coeffs.size(); ++j)
    acc += src.f_coeffs[j] * std::sin(static_cast<double>(j + 1) * pi * y);
  return std::sqrt(2.0) * acc;
}

// v_{k,m}(y) assembled from scratch: sum_l z_l kappa(xi_l, y) / sigma_{k,m}.
double v_km(std::size_t k, std::size_t m, double y) {
  const double n1 = static_cast<double>(m + 1);
  double acc = 0.0;
  for (std::size_t l = 1; l <= m; ++l) {
    const double xi = l / n1;
    const double z = std::sqrt(2.0 / n1) * std::sin(static_cast<double>(k * l) * pi / n1);
    acc += z * std::min(xi, y) * (1.0 - std::max(xi, y));
  }
  return acc / green::discrete_singular_value(k, m);
}

}  // namespace

TEST(Kernel, Values) {
  EXPECT_DOUBLE_EQ(green::kernel_value(0.5, 0.5), 0.25);
  EXPECT_EQ(green::kernel_value(0.0, 0.3), 0.0);
  EXPECT_EQ(green::kernel_value(0.3, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(green::kernel_value(0.2, 0.6), green::kernel_value(0.6, 0.2));
  EXPECT_THROW(green::kernel_value(1.5, 0.1), std::domain_error);
}

TEST(Kernel, SquaredIntegralAtMidpoint) {
  auto f = [](double y) { return std::pow(green::kernel_value(0.5, y), 2); };
  EXPECT_NEAR(integrate(f, 0.0, 0.5) + integrate(f, 0.5, 1.0), 1.0 / 48.0, 1e-15);
}

TEST(Kernel, PrintedFormDiffersFromGreenFunction) {
  EXPECT_NE(green::kernel_value(0.2, 0.6, green::KernelForm::printed_max), green::kernel_value(0.2, 0.6));
}

TEST(DiscreteSingularValue, OneByOne) {
  EXPECT_NEAR(std::pow(green::discrete_singular_value(1, 1), 2), 1.0 / 48.0, 1e-15);
  EXPECT_THROW(green::discrete_singular_value(0, 3), std::invalid_argument);
  EXPECT_THROW(green::discrete_singular_value(4, 3), std::invalid_argument);
}

TEST(DiscreteSingularValue, MatchesEigenvaluesOfGramMatrix) {
  for (std::size_t m : {1, 2, 4, 8, 16, 32}) {
    const auto eig = symmetric_eigendecomposition(green::build_matrices(m).t);
    for (std::size_t k = 1; k <= m; ++k) {
      const double s = green::discrete_singular_value(k, m);
      EXPECT_NEAR(s * s, eig.values[static_cast<Eigen::Index>(k - 1)], 1e-9 * s * s) << "m=" << m << " k=" << k;
    }
  }
}

TEST(DiscreteSingularValue, NonIncreasing) {
  for (std::size_t m : {3, 50, 511})
    for (std::size_t k = 1; k < m; ++k)
      EXPECT_GE(green::discrete_singular_value(k, m), green::discrete_singular_value(k + 1, m));
}

TEST(DiscreteSingularValue, ApproachesContinuousValue) {
  double prev = 1.0;
  for (std::size_t m : {64, 256, 1024}) {
    const double gap = std::abs(1.0 - green::cross_gram(1, 1, m));
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Matrices, OneByOne) {
  const auto g = green::build_matrices(1);
  EXPECT_EQ(g.delta(0, 0), 2.0);
  EXPECT_EQ(g.r(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(g.s(0, 0), 0.25);
  EXPECT_NEAR(g.t(0, 0), 1.0 / 48.0, 1e-16);
}

TEST(Matrices, GramEntriesMatchQuadrature) {
  const std::size_t m = 5;
  const auto g = green::build_matrices(m);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      auto f = [&](double y) { return green::kernel_value(i / 6.0, y) * green::kernel_value(j / 6.0, y); };
      double q = 0.0;
      for (int seg = 0; seg < 6; ++seg) q += gauss<double, 7>::integrate(f, seg / 6.0, (seg + 1) / 6.0);
      EXPECT_NEAR(g.t(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)), q, 1e-15);
    }
}

TEST(Matrices, LaplacianCommutes) {
  for (std::size_t m = 1; m <= 32; ++m) {
    const auto g = green::build_matrices(m);
    EXPECT_LT((g.delta * g.s - g.s * g.delta).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((g.delta * g.t - g.t * g.delta).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Matrices, EigenRelationsOnSineVectors) {
  for (std::size_t m = 1; m <= 20; ++m) {
    const auto g = green::build_matrices(m);
    const green::GreenModel model(m);
    for (std::size_t k = 1; k <= m; ++k) {
      const Vector z = model.z_vector(k);
      const double rho = 4.0 + 2.0 * std::cos(k * pi / (m + 1.0));
      EXPECT_NEAR(green::r_matrix_eigenvalue(k, m), rho, 1e-14);
      EXPECT_LT((g.r * z - rho * z).norm(), 1e-10);
      const double mu = green::s_matrix_eigenvalue(k, m);
      EXPECT_GT(mu, 0.0);
      EXPECT_LT((g.s * z - mu * z).norm(), 1e-10 * mu);
      const double sig = green::discrete_singular_value(k, m);
      EXPECT_NEAR(mu * mu * rho / (6.0 * (m + 1.0)), sig * sig, 1e-10 * sig * sig);
    }
  }
}

TEST(Matrices, KernelMatrixEigenvaluesMatchEigensolver) {
  const auto eig = symmetric_eigendecomposition(green::build_matrices(8).s);
  const green::GreenModel model(8);
  EXPECT_NEAR(green::s_matrix_eigenvalue(1, 1), 0.25, 1e-15);
  for (std::size_t k = 1; k <= 8; ++k) {
    const auto i = static_cast<Eigen::Index>(k - 1);
    EXPECT_NEAR(eig.values[i], green::s_matrix_eigenvalue(k, 8), 1e-10);
    EXPECT_NEAR(std::abs(eig.vectors.col(i).dot(model.z_vector(k))), 1.0, 1e-10);
  }
}

TEST(GreenModel, LeftVectorsOrthonormal) {
  for (std::size_t m : {1, 7, 64}) EXPECT_LT(orthonormality_defect(green::GreenModel(m).system().left), 1e-10);
}

TEST(GreenModel, OperatorMapsRightToScaledLeftVectors) {
  // (K_m v_{k,m})(xi_l) = int kappa(xi_l, y) v_{k,m}(y) dy, exact Gauss on each cell.
  for (std::size_t m : {1, 2, 4, 8, 16, 32}) {
    const green::GreenModel model(m);
    const auto sys = model.system();
    const double n1 = m + 1.0;
    for (std::size_t k = 1; k <= m; ++k) {
      const Vector c = sys.right.expansion(static_cast<Eigen::Index>(k - 1));
      const Vector u = model.z_vector(k);
      for (std::size_t l = 1; l <= m; ++l) {
        auto f = [&](double y) {
          double v = 0.0;
          for (Eigen::Index q = 0; q < c.size(); ++q) v += c[q] * green::kernel_value((q + 1) / n1, y);
          return green::kernel_value(l / n1, y) * v;
        };
        double acc = 0.0;
        for (std::size_t seg = 0; seg <= m; ++seg) acc += gauss<double, 7>::integrate(f, seg / n1, (seg + 1) / n1);
        EXPECT_NEAR(acc, model.sigma(k) * u[static_cast<Eigen::Index>(l - 1)], 1e-8 * model.sigma(k));
      }
    }
  }
}

TEST(GreenModel, RightFunctionsOrthonormal) {
  const std::size_t m = 6;
  const auto sys = green::GreenModel(m).system();
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) {
      auto f = [&](double y) { return sys.right.evaluate(i, y) * sys.right.evaluate(j, y); };
      double acc = 0.0;
      for (std::size_t seg = 0; seg <= m; ++seg) acc += gauss<double, 7>::integrate(f, seg / 7.0, (seg + 1) / 7.0);
      EXPECT_NEAR(acc, i == j ? 1.0 : 0.0, 1e-12);
    }
}

TEST(TrigOrthogonality, Examples) {
  EXPECT_EQ(green::trig_orthogonality(1, 1, 3), 2.0);
  EXPECT_EQ(green::trig_orthogonality(5, 3, 3), -2.0);
  EXPECT_EQ(green::trig_orthogonality(2, 1, 3), 0.0);
  EXPECT_EQ(green::trig_orthogonality(8, 1, 3), 0.0);  // j a multiple of m+1
}

TEST(TrigOrthogonality, DirectSummation) {
  for (std::size_t m = 1; m <= 20; ++m)
    for (std::size_t j = 1; j <= 5 * (m + 1); ++j)
      for (std::size_t k = 1; k <= m; ++k) {
        double sum = 0.0;
        for (std::size_t l = 1; l <= m; ++l) sum += std::sin(pi * j * l / (m + 1.0)) * std::sin(pi * k * l / (m + 1.0));
        ASSERT_NEAR(sum, green::trig_orthogonality(j, k, m), 1e-10) << j << ' ' << k << ' ' << m;
      }
}

TEST(CrossGram, FirstModesAgainstQuadrature) {
  auto f = [](double y) { return std::sqrt(2.0) * std::sin(pi * y) * v_km(1, 1, y); };
  const double q = integrate(f, 0.0, 0.5) + integrate(f, 0.5, 1.0);
  EXPECT_NEAR(green::cross_gram(1, 1, 1), q, 1e-12);
  EXPECT_NEAR(q, 0.9927, 1e-3);
  EXPECT_EQ(green::cross_gram(2, 1, 3), 0.0);
  EXPECT_EQ(green::cross_gram_sign(5, 3, 3), -1);
}

TEST(CrossGram, QuadratureOverSmallModels) {
  for (std::size_t m = 1; m <= 16; m += 3)
    for (std::size_t k = 1; k <= m; ++k)
      for (std::size_t j = 1; j <= 50; ++j) {
        auto f = [&](double y) { return std::sqrt(2.0) * std::sin(pi * j * y) * v_km(k, m, y); };
        double q = 0.0;
        for (std::size_t seg = 0; seg <= m; ++seg) q += integrate(f, seg / (m + 1.0), (seg + 1) / (m + 1.0));
        ASSERT_NEAR(green::cross_gram(j, k, m), q, 1e-8) << j << ' ' << k << ' ' << m;
      }
}

TEST(CrossGram, Completeness) {
  double sum = 0.0;
  for (std::size_t j = 1; j <= 2000; ++j) sum += std::pow(green::cross_gram(j, 1, 8), 2);
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(SampleSource, UnitDraws) {
  const auto src = green::SampledSource::from_draws(1.25, Vector::Ones(4));
  EXPECT_NEAR(src.f_coeffs[0], std::pow(pi, -2.5), 1e-15);
  EXPECT_NEAR(src.f_coeffs[1], std::pow(2.0 * pi, -2.5), 1e-15);
  EXPECT_DOUBLE_EQ(src.rho(), 2.0);
}

TEST(SampleSource, SeededAndSharedAcrossSmoothness) {
  const auto a = green::sample_source(0.25, 100, 9);
  const auto b = green::sample_source(0.25, 100, 9);
  const auto c = green::sample_source(1.25, 100, 9);
  EXPECT_EQ(a.f_coeffs, b.f_coeffs);
  EXPECT_EQ(a.draws, c.draws);
  EXPECT_NE(a.draws, green::sample_source(0.25, 100, 10).draws);
  EXPECT_THROW(green::sample_source(0.25, 0, 1), std::invalid_argument);
}

TEST(SampleSource, DerivativeNormsArePartialSums) {
  const auto src = green::sample_source(1.25, 1 << 14, 1);
  double d2 = 0.0;
  for (Eigen::Index j = 0; j < src.f_coeffs.size(); ++j) d2 += std::pow((j + 1) * pi, 4) * std::pow(src.f_coeffs[j], 2);
  const auto n = green::derivative_norms(src);
  EXPECT_TRUE(std::isfinite(n.second));
  EXPECT_NEAR(n.second, std::sqrt(d2), 1e-10 * std::sqrt(d2));
}

TEST(ExactData, SingleModeAndZero) {
  Vector draws = Vector::Zero(10);
  draws[0] = std::pow(green::lambda(1), 0.75);  // f = v_1
  const auto src = green::SampledSource::from_draws(0.75, draws);
  const Vector g = green::exact_collocation_data(src, 7);
  for (int l = 1; l <= 7; ++l)
    EXPECT_NEAR(g[l - 1], green::sigma_continuous(1) * std::sqrt(2.0) * std::sin(pi * l / 8.0), 1e-15);
  const auto zero = green::SampledSource::from_draws(0.75, Vector::Zero(10));
  EXPECT_EQ(green::exact_collocation_data(zero, 7), Vector::Zero(7));
}

TEST(ExactData, MatchesQuadrature) {
  const auto src = green::sample_source(0.75, 64, 1);
  const Vector g = green::exact_collocation_data(src, 8);
  for (int l = 1; l <= 8; ++l) {
    const double xi = l / 9.0;
    auto f = [&](double y) { return green::kernel_value(xi, y) * source_value(src, y); };
    const double q = integrate(f, 0.0, xi, 8) + integrate(f, xi, 1.0, 8);
    EXPECT_NEAR(g[l - 1], q, 1e-8 * std::abs(g.maxCoeff()));
  }
}

TEST(ProjectSource, EmptyAliasingSum) {
  const auto src = green::sample_source(0.75, 3, 1);
  const Vector a = green::project_source(src, green::GreenModel(8));
  EXPECT_EQ(a[4], 0.0);
}

TEST(ProjectSource, SingleModeIsCrossGram) {
  Vector draws = Vector::Zero(1);
  draws[0] = std::pow(green::lambda(1), 1.25);
  const auto src = green::SampledSource::from_draws(1.25, draws);
  EXPECT_NEAR(green::project_source(src, green::GreenModel(1))[0], green::cross_gram(1, 1, 1), 1e-15);
}

TEST(ProjectSource, MatchesQuadrature) {
  const auto src = green::sample_source(0.25, 64, 1);
  const green::GreenModel model(8);
  const Vector a = green::project_source(src, model);
  for (std::size_t k = 1; k <= 8; ++k) {
    auto f = [&](double y) { return source_value(src, y) * v_km(k, 8, y); };
    double q = 0.0;
    for (int seg = 0; seg < 9; ++seg) q += integrate(f, seg / 9.0, (seg + 1) / 9.0, 2);
    EXPECT_NEAR(a[static_cast<Eigen::Index>(k - 1)], q, 1e-8);
  }
}

TEST(ProjectSource, ParsevalGapIsDiscretizationResidual) {
  for (double s : {0.25, 0.75, 1.25}) {
    const auto src = green::sample_source(s, 4096, 2);
    const green::GreenModel model(128);
    const Vector a = green::project_source(src, model);
    const double residual = green::discretization_residual(src, model, a);
    const double gap = src.f_coeffs.squaredNorm() - a.squaredNorm();
    // modes beyond D belong to Pf but not to the truncated residual
    Vector p = green::projected_mode_coefficients(a, model, std::size_t{1} << 20);
    p.head(4096) -= src.f_coeffs;
    EXPECT_NEAR(gap, p.squaredNorm(), 1e-9);
    EXPECT_LE(residual, gap);
    EXPECT_NEAR(residual, p.head(4096).squaredNorm(), 1e-12);
  }
}

TEST(TrialError, NoiselessFullCutoffIsResidual) {
  const auto src = green::sample_source(0.75, 512, 3);
  const green::GreenModel model(32);
  const auto obs = project_observations(green::exact_collocation_data(src, 32), model.system());
  const Vector a = green::project_source(src, model);
  const double residual = green::discretization_residual(src, model, a);
  EXPECT_NEAR(std::pow(green::trial_error(src, model, obs, 32), 2), residual, 1e-12);
}

TEST(TrialError, ZeroSourceGrowsWithCutoff) {
  const auto src = green::SampledSource::from_draws(0.75, Vector::Zero(64));
  const green::GreenModel model(16);
  Stream st(1, {5});
  ObservationCoefficients obs;
  obs.m = 16;
  obs.coeffs = 1e-3 * st.normals(16);
  double acc = 0.0, prev = -1.0;
  for (std::size_t k = 0; k <= 16; ++k) {
    if (k > 0) acc += std::pow(obs.coeffs[static_cast<Eigen::Index>(k - 1)] / model.sigma(k), 2);
    const double e = green::trial_error(src, model, obs, k);
    EXPECT_NEAR(e * e, acc, 1e-12 * std::max(1.0, acc));
    EXPECT_GE(e, prev);
    prev = e;
  }
}

TEST(TrialError, MatchesDenseGridComputation) {
  const std::size_t m = 32, d = 256;
  const auto src = green::sample_source(0.75, d, 4);
  const green::GreenModel model(m);
  const auto sys = model.system();
  Stream st(4, {6});
  const Vector g = green::exact_collocation_data(src, m);
  const Vector data = g + snr_to_delta(g, 1e3) * st.normals(m);
  const auto obs = project_observations(data, sys);
  const Vector a = green::project_source(src, model);
  const Vector modes = green::projected_mode_coefficients(a, model, std::size_t{1} << 20);
  const double tail = modes.tail(modes.size() - static_cast<Eigen::Index>(d)).squaredNorm();
  const double n1 = m + 1.0;
  for (std::size_t k : {0, 1, 5, 12, 32}) {
    Vector w = Vector::Zero(m);  // dictionary coefficients of f_k
    for (std::size_t j = 0; j < k; ++j)
      w += obs.coeffs[static_cast<Eigen::Index>(j)] / model.sigmas()[static_cast<Eigen::Index>(j)] *
           sys.right.expansion(static_cast<Eigen::Index>(j));
    auto diff2 = [&](double y) {
      double fk = 0.0;
      for (Eigen::Index l = 0; l < w.size(); ++l) fk += w[l] * green::kernel_value((l + 1) / n1, y);
      const double r = fk - source_value(src, y);
      return r * r;
    };
    double q = 0.0;
    for (std::size_t seg = 0; seg <= m; ++seg) q += integrate(diff2, seg / n1, (seg + 1) / n1);
    const double e = green::trial_error(src, model, obs, k);
    EXPECT_NEAR(std::sqrt(q), std::sqrt(e * e + tail), 1e-6 * std::sqrt(q)) << "k=" << k;
  }
}

TEST(TailBound, OrdersOfMagnitude) {
  const double d = 1 << 14, m = 512;
  const double b54 = green::tail_truncation_bound(1.25, 512, 1 << 14);
  const double b34 = green::tail_truncation_bound(0.75, 512, 1 << 14);
  const double b14 = green::tail_truncation_bound(0.25, 512, 1 << 14);
  EXPECT_NEAR(b54, 3.0 / std::pow(pi, 4) / (pi * d * d * d), 1e-12 * b54);
  EXPECT_NEAR(b34, 3.0 / std::pow(pi, 4) * m * pi / (d * d * d), 1e-12 * b34);
  EXPECT_NEAR(b14, 3.0 / std::pow(pi, 4) * std::pow(m * pi, 3) / (d * d * d), 1e-12 * b14);
  EXPECT_NEAR(std::log2(std::sqrt(b54)), -21.0, 4.0);
  EXPECT_NEAR(std::log2(std::sqrt(b34)), -17.0, 4.0);
  EXPECT_NEAR(std::log2(std::sqrt(b14)), -9.0, 4.0);
  EXPECT_LT(green::tail_truncation_bound(1.25, 512, 1 << 30), 1e-25);
}

TEST(RateBound, ConstantsAndDegenerateCases) {
  EXPECT_NEAR(green::rate_constant(1.0), std::pow(3.0 / (8.0 * std::pow(pi, 4)), 1.0 / 9.0), 1e-15);
  const auto zero = green::t0_rate_bound(1.0, 0.0, 1e-3, 512, {0.0, 0.0});
  EXPECT_EQ(zero.total(), 0.0);
  EXPECT_THROW(green::t0_rate_bound(0.75, 1.0, 1e-3, 512, {1.0, 1.0}), std::invalid_argument);
  const auto a = green::t0_rate_bound(1.25, 1.0, 1e-3, 512, {1.0, 1.0});
  const auto b = green::t0_rate_bound(1.25, 1.0, 1e-3, 512, {1.0, 1.0}, {}, 4.0 * 1.25 / (5.0 + 8.0 * 1.25));
  EXPECT_GT(b.stochastic, a.stochastic);  // smaller exponent, delta < 1
  EXPECT_EQ(a.discretization, b.discretization);
}

TEST(RateBound, HoldsInSeededTrials) {
  const std::size_t m = 512;
  const harness::IntegralSetup setup(1.25, m, 1 << 14, 1);
  const auto derivs = green::derivative_norms(setup.source);
  std::size_t within = 0, total = 0;
  for (std::size_t snr_idx = 0; snr_idx < 2; ++snr_idx)
    for (std::size_t trial = 0; trial < 100; ++trial) {
      Stream st(1, {stream_tag::noise, 99, snr_idx, trial});
      const auto rec = harness::integral_trial(setup, {}, snr_idx == 0 ? 1e3 : 1e5, st);
      const auto bound = green::t0_rate_bound(1.25, setup.source.rho(), rec.delta, m, derivs);
      within += rec.e_gcv <= bound.total() ? 1 : 0;
      ++total;
    }
  EXPECT_GE(static_cast<double>(within) / static_cast<double>(total), 0.9);
}
