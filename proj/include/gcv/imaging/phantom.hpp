#pragma once

// Synthetic test objects: an ellipse phantom with analytic line integrals for
// the CT experiment and a seeded star field for deblurring.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gcv/imaging/image.hpp"
#include "gcv/imaging/radon.hpp"
#include "gcv/rng.hpp"

namespace gcv::imaging {

/// Ellipse in normalized coordinates [-1, 1]^2 (y pointing up), rotated
/// counter-clockwise by angle_deg.
struct Ellipse {
  double intensity = 1.0;
  double semi_x = 1.0;
  double semi_y = 1.0;
  double centre_x = 0.0;
  double centre_y = 0.0;
  double angle_deg = 0.0;
};

/// Shepp-Logan head with the higher-contrast intensities of Toft's variant.
inline std::vector<Ellipse> modified_shepp_logan() {
  return {
      {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},          {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0},  {-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0},
      {0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0},     {0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0},
      {0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0},     {0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0},
      {0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0},   {0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0},
  };
}

namespace detail {

inline bool inside(const Ellipse& e, double x, double y) {
  const double rad = e.angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double u = (x - e.centre_x) * c + (y - e.centre_y) * s;
  const double v = -(x - e.centre_x) * s + (y - e.centre_y) * c;
  return (u * u) / (e.semi_x * e.semi_x) + (v * v) / (e.semi_y * e.semi_y) <= 1.0;
}

}  // namespace detail

/// Phantom value at a point of [-1, 1]^2.
inline double phantom_value(const std::vector<Ellipse>& ellipses, double x, double y) {
  double v = 0.0;
  for (const auto& e : ellipses)
    if (detail::inside(e, x, y)) v += e.intensity;
  return v;
}

/// Pixel averages on an n x n grid covering [-1, 1]^2, each pixel sampled on
/// a supersample x supersample sub-grid.
inline Image rasterize(const std::vector<Ellipse>& ellipses, int n, int supersample = 8) {
  if (n < 1 || supersample < 1) throw std::invalid_argument("rasterize: sizes must be positive");
  Image img(n, n);
  const double px = 2.0 / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int a = 0; a < supersample; ++a) {
        const double y = 1.0 - (i + (a + 0.5) / supersample) * px;
        for (int b = 0; b < supersample; ++b) {
          const double x = -1.0 + (j + (b + 0.5) / supersample) * px;
          acc += phantom_value(ellipses, x, y);
        }
      }
      img(i, j) = acc / (supersample * supersample);
    }
  }
  return img;
}

/// Line integral of one ellipse along {x cos theta + y sin theta = s}, in the
/// normalized coordinates of the ellipse.
inline double ellipse_line_integral(const Ellipse& e, double nx, double ny, double s) {
  const double rad = e.angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad), sn = std::sin(rad);
  const double nu = nx * c + ny * sn;
  const double nv = -nx * sn + ny * c;
  const double shifted = s - (e.centre_x * nx + e.centre_y * ny);
  const double a2 = e.semi_x * e.semi_x * nu * nu + e.semi_y * e.semi_y * nv * nv;
  if (shifted * shifted >= a2) return 0.0;
  return e.intensity * 2.0 * e.semi_x * e.semi_y * std::sqrt(a2 - shifted * shifted) / a2;
}

/// Exact sinogram of the continuous phantom scaled to the N x N unit-pixel
/// grid of `geometry` (normalized length 1 equals N/2 pixels).
inline Eigen::VectorXd analytic_sinogram(const std::vector<Ellipse>& ellipses, const SinogramGeometry& geometry) {
  geometry.validate();
  const double scale = 0.5 * geometry.n;
  const int ns = geometry.rays_per_angle();
  Eigen::VectorXd out(geometry.ray_count());
  Eigen::Index alpha = 0;
  for (double angle : geometry.angles_deg) {
    const auto [nx, ny] = ray_normal(angle);
    for (int r = 0; r < ns; ++r, ++alpha) {
      double acc = 0.0;
      for (const auto& e : ellipses) acc += ellipse_line_integral(e, nx, ny, geometry.offset(r) / scale);
      out[alpha] = acc * scale;
    }
  }
  return out;
}

struct StarFieldParams {
  int stars = 60;
  double min_brightness = 0.2;
  double max_brightness = 1.0;
  double min_width = 0.6;
  double max_width = 2.5;
  double nebula_brightness = 0.15;
  int margin = 0;  // dark border; star centres and the nebula stay inside it
};

/// Sum of Gaussian blobs at uniformly drawn positions over a faint broad
/// nebula, all drawn from one seeded stream.
inline Image star_field(int size, std::uint64_t seed, const StarFieldParams& p = {}) {
  if (size < 1) throw std::invalid_argument("star_field: size must be positive");
  if (p.margin < 0 || 2 * p.margin >= size) throw std::invalid_argument("star_field: margin leaves no sky");
  Stream stream(seed, {stream_tag::phantom});
  struct Blob {
    double r, c, amp, width;
  };
  std::vector<Blob> blobs;
  const double lo = p.margin;
  const double side = size - 2 * p.margin;
  blobs.push_back({lo + side * (0.4 + 0.2 * stream.uniform()), lo + side * (0.4 + 0.2 * stream.uniform()),
                   p.nebula_brightness, side / 8.0});
  for (int q = 0; q < p.stars; ++q) {
    const double r = lo + side * stream.uniform();
    const double c = lo + side * stream.uniform();
    const double amp = p.min_brightness + (p.max_brightness - p.min_brightness) * stream.uniform();
    const double width = p.min_width + (p.max_width - p.min_width) * stream.uniform();
    blobs.push_back({r, c, amp, width});
  }
  Image img = Image::Zero(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      for (const auto& b : blobs) {
        const double d2 = (i - b.r) * (i - b.r) + (j - b.c) * (j - b.c);
        img(i, j) += b.amp * std::exp(-d2 / (2.0 * b.width * b.width));
      }
  return img;
}

}  // namespace gcv::imaging
