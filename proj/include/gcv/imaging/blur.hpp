#pragma once

// Gaussian point-spread blur with zero or reflective boundary handling, its
// sparse matrix, and the cosine-transform diagonalization that holds for
// reflective boundaries and quadrantally symmetric kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gcv/imaging/image.hpp"
#include "gcv/spectral.hpp"

namespace gcv::imaging {

enum class Boundary { zero, reflective };

/// K x K kernel, weights(m + M, n + M) = w_{m,n} for m, n in [-M, M].
struct PsfKernel {
  int size = 1;
  double sigma = 1.0;
  Matrix weights = Matrix::Ones(1, 1);
  Vector profile;  // 1-D factor when weights = profile profile^T, else empty

  int half() const { return (size - 1) / 2; }
  double operator()(int m, int n) const { return weights(m + half(), n + half()); }

  /// w_{m,n} = w_{-m,n} = w_{m,-n}: the condition for the cosine diagonalization.
  bool quadrantally_symmetric(double tol = 1e-14) const {
    const int h = half();
    for (int m = -h; m <= h; ++m)
      for (int n = -h; n <= h; ++n)
        if (std::abs((*this)(m, n) - (*this)(-m, n)) > tol ||
            std::abs((*this)(m, n) - (*this)(m, -n)) > tol)
          return false;
    return true;
  }
};

/// Sampled Gaussian exp(-(m^2 + n^2) / (2 sigma^2)) normalized to unit sum.
inline PsfKernel gaussian_psf(double sigma, int size) {
  if (size < 1 || size % 2 == 0) throw std::invalid_argument("psf size must be odd and positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("psf sigma must be positive");
  PsfKernel psf;
  psf.size = size;
  psf.sigma = sigma;
  psf.weights.resize(size, size);
  const int h = psf.half();
  for (int m = -h; m <= h; ++m)
    for (int n = -h; n <= h; ++n)
      psf.weights(m + h, n + h) = std::exp(-(m * m + n * n) / (2.0 * sigma * sigma));
  psf.weights /= psf.weights.sum();
  psf.profile.resize(size);
  for (int m = -h; m <= h; ++m) psf.profile[m + h] = std::exp(-(m * m) / (2.0 * sigma * sigma));
  psf.profile /= psf.profile.sum();
  return psf;
}

namespace detail {

/// Half-sample symmetric reflection into [0, n): -1 -> 0, n -> n - 1, repeated
/// with period 2n for offsets beyond one image width.
inline Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace detail

/// g[i, j] = sum_{m,n} f[i - m, j - n] w_{m,n}, summed term by term.
inline Image apply_blur_direct(const Image& image, const PsfKernel& psf, Boundary bc) {
  const Eigen::Index h = image.rows(), w = image.cols();
  if (h < 1 || w < 1) throw std::invalid_argument("apply_blur: empty image");
  const int half = psf.half();
  Image out = Image::Zero(h, w);
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int m = -half; m <= half; ++m) {
        Eigen::Index r = i - m;
        if (r < 0 || r >= h) {
          if (bc == Boundary::zero) continue;
          r = detail::reflect(r, h);
        }
        for (int n = -half; n <= half; ++n) {
          Eigen::Index c = j - n;
          if (c < 0 || c >= w) {
            if (bc == Boundary::zero) continue;
            c = detail::reflect(c, w);
          }
          acc += image(r, c) * psf(m, n);
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

namespace detail {

/// One-dimensional pass along rows (axis 0) or columns (axis 1).
inline Image blur_axis(const Image& image, const Vector& profile, Boundary bc, int axis) {
  const Eigen::Index h = image.rows(), w = image.cols();
  const Eigen::Index len = axis == 0 ? h : w;
  const int half = static_cast<int>(profile.size() - 1) / 2;
  Image out = Image::Zero(h, w);
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < w; ++j) {
      const Eigen::Index pos = axis == 0 ? i : j;
      double acc = 0.0;
      for (int m = -half; m <= half; ++m) {
        Eigen::Index q = pos - m;
        if (q < 0 || q >= len) {
          if (bc == Boundary::zero) continue;
          q = reflect(q, len);
        }
        acc += profile[m + half] * (axis == 0 ? image(q, j) : image(i, q));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace detail

/// Blur with the kernel's boundary rule; separable kernels are applied as two
/// one-dimensional passes, which agrees with the direct sum up to round-off.
inline Image apply_blur(const Image& image, const PsfKernel& psf, Boundary bc) {
  if (psf.profile.size() != psf.size) return apply_blur_direct(image, psf, bc);
  if (image.rows() < 1 || image.cols() < 1) throw std::invalid_argument("apply_blur: empty image");
  return detail::blur_axis(detail::blur_axis(image, psf.profile, bc, 0), psf.profile, bc, 1);
}

using SparseRow = std::vector<std::pair<Eigen::Index, double>>;

/// Row alpha of the blur matrix A as (column, value) pairs sorted by column.
/// With reflective boundaries several kernel taps may land on one pixel; their
/// weights are summed.
inline SparseRow blur_matrix_row(Eigen::Index alpha, Eigen::Index height, Eigen::Index width,
                                 const PsfKernel& psf, Boundary bc) {
  if (alpha < 0 || alpha >= height * width) throw std::out_of_range("blur_matrix_row: alpha out of range");
  const auto [i, j] = pixel_of(alpha, width);
  const int half = psf.half();
  std::map<Eigen::Index, double> entries;
  for (int m = -half; m <= half; ++m) {
    Eigen::Index r = i - m;
    if (r < 0 || r >= height) {
      if (bc == Boundary::zero) continue;
      r = detail::reflect(r, height);
    }
    for (int n = -half; n <= half; ++n) {
      Eigen::Index c = j - n;
      if (c < 0 || c >= width) {
        if (bc == Boundary::zero) continue;
        c = detail::reflect(c, width);
      }
      entries[r * width + c] += psf(m, n);
    }
  }
  return {entries.begin(), entries.end()};
}

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline SparseMatrix blur_matrix(Eigen::Index height, Eigen::Index width, const PsfKernel& psf,
                                Boundary bc) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index alpha = 0; alpha < height * width; ++alpha)
    for (const auto& [beta, value] : blur_matrix_row(alpha, height, width, psf, bc))
      triplets.emplace_back(alpha, beta, value);
  SparseMatrix a(height * width, height * width);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

// ---------------------------------------------------------------------------
// Cosine-transform diagonalization

/// Orthonormal DCT-II matrix, C(k, n) = sqrt((2 - [k == 0]) / N) cos(pi k (2n + 1) / (2N)).
inline Matrix dct_matrix(Eigen::Index n) {
  Matrix c(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      c(k, i) = scale * std::cos(std::numbers::pi * static_cast<double>(k * (2 * i + 1)) /
                                 (2.0 * static_cast<double>(n)));
  }
  return c;
}

/// Shared state of the 2-D cosine basis: transform matrix plus the ordering of
/// frequency pairs by decreasing |eigenvalue|.
struct CosineSpectrum {
  Eigen::Index n = 0;
  Matrix dct;                          // N x N
  Image eigenvalues;                   // lambda in natural (frequency) order
  std::vector<Eigen::Index> order;     // sorted position -> flat frequency index
  Vector signs;                        // sign of lambda in sorted order
  Vector sigmas;                       // |lambda| in sorted order, rank entries

  Image forward(const Image& f) const { return dct * f * dct.transpose(); }
  Image inverse(const Image& coeffs) const { return dct.transpose() * coeffs * dct; }
};

/// Left basis: 2-D DCT basis images, sorted by decreasing singular value.
/// Only the first `rank` are exposed; the remaining transform coefficients are
/// reported as residual energy.
class CosineLeftBasis {
 public:
  explicit CosineLeftBasis(std::shared_ptr<const CosineSpectrum> cs) : cs_(std::move(cs)) {}

  Eigen::Index dimension() const { return cs_->n * cs_->n; }
  Eigen::Index size() const { return cs_->sigmas.size(); }

  Vector coefficients(const Vector& x) const {
    const Image t = cs_->forward(devectorize(x, cs_->n, cs_->n));
    Vector c(size());
    for (Eigen::Index j = 0; j < size(); ++j) c[j] = t.data()[cs_->order[static_cast<std::size_t>(j)]];
    return c;
  }

  double residual_energy(const Vector& x, const Vector&) const {
    const Image t = cs_->forward(devectorize(x, cs_->n, cs_->n));
    double acc = 0.0;
    for (std::size_t j = static_cast<std::size_t>(size()); j < cs_->order.size(); ++j) {
      const double v = t.data()[cs_->order[j]];
      acc += v * v;
    }
    return acc;
  }

  Vector vector(Eigen::Index j) const {
    Image unit = Image::Zero(cs_->n, cs_->n);
    unit.data()[cs_->order[static_cast<std::size_t>(j)]] = 1.0;
    return vectorize(cs_->inverse(unit));
  }

 private:
  std::shared_ptr<const CosineSpectrum> cs_;
};

/// Right basis: v_j = sign(lambda_j) u_j, over all N^2 frequencies.
class CosineRightBasis {
 public:
  explicit CosineRightBasis(std::shared_ptr<const CosineSpectrum> cs) : cs_(std::move(cs)) {}

  Eigen::Index dimension() const { return cs_->n * cs_->n; }
  Eigen::Index size() const { return dimension(); }

  /// Coordinates <x, v_j> for every j (sorted order).
  Vector coefficients(const Vector& x) const {
    const Image t = cs_->forward(devectorize(x, cs_->n, cs_->n));
    Vector c(size());
    for (Eigen::Index j = 0; j < size(); ++j)
      c[j] = cs_->signs[j] * t.data()[cs_->order[static_cast<std::size_t>(j)]];
    return c;
  }

  /// sum_j amplitudes_j v_j.
  Vector synthesize(const Vector& amplitudes) const {
    Image t = Image::Zero(cs_->n, cs_->n);
    for (Eigen::Index j = 0; j < amplitudes.size(); ++j)
      t.data()[cs_->order[static_cast<std::size_t>(j)]] = cs_->signs[j] * amplitudes[j];
    return vectorize(cs_->inverse(t));
  }

  Vector vector(Eigen::Index j) const {
    Vector a = Vector::Zero(j + 1);
    a[j] = 1.0;
    return synthesize(a);
  }

 private:
  std::shared_ptr<const CosineSpectrum> cs_;
};

using BlurSystem = SingularSystem<CosineLeftBasis, CosineRightBasis>;

struct BlurDecomposition {
  std::shared_ptr<const CosineSpectrum> spectrum;
  BlurSystem system;

  /// A x = C^T (lambda .* (C x)) using the natural-order eigenvalues.
  Vector apply(const Vector& x) const {
    const auto& s = *spectrum;
    const Image t = s.forward(devectorize(x, s.n, s.n));
    return vectorize(s.inverse(t.cwiseProduct(s.eigenvalues)));
  }
};

/// Eigen-decomposition A = C2^T diag(lambda) C2 of the reflective blur on N x N
/// images, with lambda = C2(A e_1) ./ C2(e_1).  Singular values |lambda| are
/// sorted descending (stable in frequency order) and those below
/// rank_tol * max|lambda| are dropped from the exposed rank.
inline BlurDecomposition dct_spectral_decomposition(const PsfKernel& psf, Eigen::Index n,
                                                    Boundary bc = Boundary::reflective,
                                                    double rank_tol = 1e-12) {
  if (bc != Boundary::reflective)
    throw std::invalid_argument("cosine diagonalization requires reflective boundaries");
  if (!psf.quadrantally_symmetric())
    throw std::invalid_argument("cosine diagonalization requires a symmetric psf");
  if (n < 1) throw std::invalid_argument("image size must be positive");

  auto cs = std::make_shared<CosineSpectrum>();
  cs->n = n;
  cs->dct = dct_matrix(n);
  Image impulse = Image::Zero(n, n);
  impulse(0, 0) = 1.0;
  const Image response = cs->forward(apply_blur(impulse, psf, bc));
  const Image basis = cs->forward(impulse);
  cs->eigenvalues = response.cwiseQuotient(basis);

  const auto total = static_cast<std::size_t>(n * n);
  cs->order.resize(total);
  std::iota(cs->order.begin(), cs->order.end(), Eigen::Index{0});
  const double* lam = cs->eigenvalues.data();
  std::stable_sort(cs->order.begin(), cs->order.end(),
                   [lam](Eigen::Index a, Eigen::Index b) { return std::abs(lam[a]) > std::abs(lam[b]); });
  cs->signs.resize(static_cast<Eigen::Index>(total));
  const double top = std::abs(lam[cs->order[0]]);
  Eigen::Index rank = 0;
  for (std::size_t j = 0; j < total; ++j) {
    const double v = lam[cs->order[j]];
    cs->signs[static_cast<Eigen::Index>(j)] = v < 0.0 ? -1.0 : 1.0;
    if (std::abs(v) > rank_tol * top && rank == static_cast<Eigen::Index>(j)) ++rank;
  }
  cs->sigmas.resize(rank);
  for (Eigen::Index j = 0; j < rank; ++j) cs->sigmas[j] = std::abs(lam[cs->order[static_cast<std::size_t>(j)]]);

  std::shared_ptr<const CosineSpectrum> shared = cs;
  BlurDecomposition out{shared, BlurSystem{cs->sigmas, CosineLeftBasis(shared), CosineRightBasis(shared)}};
  out.system.validate();
  return out;
}

struct BlurredPair {
  Image truth;    // central N x N crop of the padded truth
  Image blurred;  // central crop of the zero-boundary blur of the padded truth
};

/// Blurs an enlarged image with zero boundaries and crops the central
/// `size` x `size` window from both, so that the reflective model reproduces
/// the data only approximately.
inline BlurredPair make_inverse_crime_free_data(const Image& padded_truth, const PsfKernel& psf,
                                                Eigen::Index size) {
  const Eigen::Index pad_rows = padded_truth.rows() - size;
  const Eigen::Index pad_cols = padded_truth.cols() - size;
  if (pad_rows < 0 || pad_cols < 0 || pad_rows % 2 != 0 || pad_cols % 2 != 0)
    throw std::invalid_argument("padded image must exceed the crop by an even margin");
  const Eigen::Index pr = pad_rows / 2, pc = pad_cols / 2;
  if (pr < psf.half() || pc < psf.half())
    throw std::invalid_argument("padding must be at least the psf half width");
  const Image blurred = apply_blur(padded_truth, psf, Boundary::zero);
  return {padded_truth.block(pr, pc, size, size), blurred.block(pr, pc, size, size)};
}

}  // namespace gcv::imaging
