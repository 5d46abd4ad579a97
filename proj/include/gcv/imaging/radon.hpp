#pragma once

// Parallel-beam ray geometry and the length-weighted Radon matrix on a
// centred N x N grid of unit pixels.  Image row 0 is the top row.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gcv/imaging/image.hpp"

namespace gcv::imaging {

struct SinogramGeometry {
  int n = 1;
  std::vector<double> angles_deg;

  static SinogramGeometry uniform(int n, int count) {
    if (count < 1) throw std::invalid_argument("at least one projection angle is required");
    SinogramGeometry g;
    g.n = n;
    for (int a = 0; a < count; ++a) g.angles_deg.push_back(180.0 * a / count);
    g.validate();
    return g;
  }

  int rays_per_angle() const {
    return std::max(1, static_cast<int>(std::lround(n * std::numbers::sqrt2)));
  }
  double detector_span() const { return rays_per_angle() - 1; }
  Eigen::Index ray_count() const {
    return static_cast<Eigen::Index>(angles_deg.size()) * rays_per_angle();
  }

  /// Signed offset of ray r from the grid centre.
  double offset(int r) const { return r - 0.5 * detector_span(); }

  void validate() const {
    if (n < 1) throw std::invalid_argument("image side must be positive");
    if (angles_deg.empty()) throw std::invalid_argument("no projection angles");
    for (std::size_t a = 0; a < angles_deg.size(); ++a) {
      if (angles_deg[a] < 0.0 || angles_deg[a] >= 180.0)
        throw std::invalid_argument("angles must lie in [0, 180)");
      if (a > 0 && !(angles_deg[a] > angles_deg[a - 1]))
        throw std::invalid_argument("angles must be strictly increasing");
    }
  }
};

/// Unit normal (cos theta, sin theta); exact at multiples of 90 degrees.
inline std::pair<double, double> ray_normal(double degrees) {
  if (degrees == 0.0) return {1.0, 0.0};
  if (degrees == 90.0) return {0.0, 1.0};
  const double rad = degrees * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

/// The ray {x cos theta + y sin theta = s}, traversed as p(t) = s n + t d with
/// d = (-sin theta, cos theta).
struct Ray {
  double nx = 1.0, ny = 0.0, s = 0.0;

  double dx() const { return -ny; }
  double dy() const { return nx; }
  double x(double t) const { return s * nx + t * dx(); }
  double y(double t) const { return s * ny + t * dy(); }
};

/// Parameter interval of the ray inside the closed square [-h, h]^2, if any.
inline std::optional<std::pair<double, double>> clip_to_square(const Ray& ray, double h) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const double p0[2] = {ray.s * ray.nx, ray.s * ray.ny};
  const double d[2] = {ray.dx(), ray.dy()};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p0[axis] < -h || p0[axis] > h) return std::nullopt;
      continue;
    }
    double a = (-h - p0[axis]) / d[axis];
    double b = (h - p0[axis]) / d[axis];
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(lo, hi);
}

/// (pixel, length) pairs of one ray, in traversal order.  Grid crossings are
/// collected and sorted, and every piece is assigned to the pixel containing
/// its midpoint.  A piece running exactly along a grid line goes to the pixel
/// below or to the right of it, clamped into the grid.
inline std::vector<std::pair<Eigen::Index, double>> trace_ray(const Ray& ray, int n) {
  std::vector<std::pair<Eigen::Index, double>> out;
  const double h = 0.5 * n;
  const auto span = clip_to_square(ray, h);
  if (!span) return out;
  const auto [t0, t1] = *span;
  std::vector<double> ts{t0, t1};
  const double p0[2] = {ray.s * ray.nx, ray.s * ray.ny};
  const double d[2] = {ray.dx(), ray.dy()};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) continue;
    for (int line = 0; line <= n; ++line) {
      const double t = (line - h - p0[axis]) / d[axis];
      if (t > t0 && t < t1) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  const double tiny = 1e-12 * std::max(1.0, static_cast<double>(n));
  for (std::size_t q = 0; q + 1 < ts.size(); ++q) {
    const double len = ts[q + 1] - ts[q];
    if (len <= tiny) continue;
    const double tm = 0.5 * (ts[q] + ts[q + 1]);
    const auto col = std::clamp(static_cast<Eigen::Index>(std::floor(ray.x(tm) + h)), Eigen::Index{0},
                                Eigen::Index{n - 1});
    const auto row = std::clamp(static_cast<Eigen::Index>(std::floor(h - ray.y(tm))), Eigen::Index{0},
                                Eigen::Index{n - 1});
    out.emplace_back(row * n + col, len);
  }
  return out;
}

struct RadonOperator {
  SinogramGeometry geometry;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;  // rays x pixels, ray alpha = angle * N_s + r

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }

  Ray ray(Eigen::Index alpha) const {
    const int ns = geometry.rays_per_angle();
    const auto [nx, ny] = ray_normal(geometry.angles_deg[static_cast<std::size_t>(alpha / ns)]);
    return {nx, ny, geometry.offset(static_cast<int>(alpha % ns))};
  }
};

inline RadonOperator radon_build(const SinogramGeometry& geometry) {
  geometry.validate();
  const int n = geometry.n;
  const int ns = geometry.rays_per_angle();
  RadonOperator op{geometry, {}};
  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::Index alpha = 0;
  for (double angle : geometry.angles_deg) {
    const auto [nx, ny] = ray_normal(angle);
    for (int r = 0; r < ns; ++r, ++alpha)
      for (const auto& [beta, len] : trace_ray({nx, ny, geometry.offset(r)}, n))
        triplets.emplace_back(alpha, beta, len);
  }
  op.matrix.resize(geometry.ray_count(), static_cast<Eigen::Index>(n) * n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

inline Eigen::VectorXd radon_apply(const RadonOperator& op, const Eigen::VectorXd& image) {
  if (image.size() != op.cols()) throw std::invalid_argument("radon_apply: image does not match the geometry");
  return op.matrix * image;
}

inline Eigen::VectorXd radon_apply(const RadonOperator& op, const Image& image) {
  if (image.rows() != op.geometry.n || image.cols() != op.geometry.n)
    throw std::invalid_argument("radon_apply: image does not match the geometry");
  return radon_apply(op, vectorize(image));
}

/// Sinogram of an image given on a grid `factor` times finer than the
/// geometry's, along the same physical rays (lengths in coarse pixel units).
inline Eigen::VectorXd fine_grid_sinogram(const SinogramGeometry& geometry, const Image& fine, int factor) {
  geometry.validate();
  if (factor < 1 || fine.rows() != geometry.n * factor || fine.cols() != geometry.n * factor)
    throw std::invalid_argument("fine_grid_sinogram: image does not match the refined geometry");
  const int ns = geometry.rays_per_angle();
  Eigen::VectorXd out(geometry.ray_count());
  Eigen::Index alpha = 0;
  for (double angle : geometry.angles_deg) {
    const auto [nx, ny] = ray_normal(angle);
    for (int r = 0; r < ns; ++r, ++alpha) {
      double acc = 0.0;
      for (const auto& [beta, len] : trace_ray({nx, ny, geometry.offset(r) * factor}, geometry.n * factor))
        acc += len * fine.data()[beta];
      out[alpha] = acc / factor;
    }
  }
  return out;
}

/// Sinogram vector reshaped to angles x detector bins.
inline Image sinogram_image(const SinogramGeometry& geometry, const Eigen::VectorXd& sinogram) {
  return devectorize(sinogram, static_cast<Eigen::Index>(geometry.angles_deg.size()), geometry.rays_per_angle());
}

}  // namespace gcv::imaging
