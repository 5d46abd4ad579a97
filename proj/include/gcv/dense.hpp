#pragma once

// Dense decompositions used as independent references for the closed-form
// spectra and as the spectral backend for operators without a closed form.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gcv/spectral.hpp"

namespace gcv {

struct SymmetricEigen {
  Vector values;   // non-increasing
  Matrix vectors;  // column i belongs to values[i]
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.
inline SymmetricEigen symmetric_eigendecomposition(const Matrix& input) {
  if (input.rows() != input.cols()) throw std::invalid_argument("matrix is not square");
  const Eigen::Index n = input.rows();
  const double scale = std::max(1.0, input.cwiseAbs().maxCoeff());
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("matrix is not symmetric");

  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double frob = a.norm();

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-15 * frob) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with the rotation acting on rows/columns p and q.
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

struct DenseSvd {
  Vector sigmas;  // non-increasing, >= 0, length min(p, q)
  Matrix u;       // p x min(p, q)
  Matrix v;       // q x min(p, q)
};

/// Thin SVD, A = U diag(sigma) V^T.  Backed by Eigen's divide-and-conquer SVD.
inline DenseSvd dense_svd(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

/// Orthonormal columns stored explicitly.  When there are fewer columns than
/// rows the residual energy is computed directly from the projection residual
/// rather than by subtraction.
class DenseBasis {
 public:
  DenseBasis() = default;
  explicit DenseBasis(Matrix columns) : columns_(std::move(columns)) {}

  Eigen::Index dimension() const { return columns_.rows(); }
  Eigen::Index size() const { return columns_.cols(); }
  Vector coefficients(const Vector& x) const { return columns_.transpose() * x; }
  double residual_energy(const Vector& x, const Vector& coeffs) const {
    if (columns_.cols() == columns_.rows()) return 0.0;
    return (x - columns_ * coeffs).squaredNorm();
  }
  Vector vector(Eigen::Index j) const { return columns_.col(j); }
  const Matrix& matrix() const { return columns_; }

 private:
  Matrix columns_;
};

/// Right singular vectors as dense coordinate vectors.
class DenseRightBasis {
 public:
  DenseRightBasis() = default;
  explicit DenseRightBasis(Matrix columns) : columns_(std::move(columns)) {}

  Eigen::Index dimension() const { return columns_.rows(); }
  Eigen::Index size() const { return columns_.cols(); }
  Vector vector(Eigen::Index j) const { return columns_.col(j); }
  /// Coordinates of x in the basis (all stored columns).
  Vector coefficients(const Vector& x) const { return columns_.transpose() * x; }
  /// sum_{j<k} amplitudes_j v_j.
  Vector synthesize(const Vector& amplitudes) const {
    return columns_.leftCols(amplitudes.size()) * amplitudes;
  }
  const Matrix& matrix() const { return columns_; }

 private:
  Matrix columns_;
};

using DenseSystem = SingularSystem<DenseBasis, DenseRightBasis>;

/// Builds a singular system from a dense SVD, keeping singular values above
/// rel_tol * sigma_1.  The dropped left directions end up in the residual
/// energy of projected data; the right basis keeps every column so that exact
/// solutions can be expanded completely.
inline DenseSystem make_dense_system(const DenseSvd& svd, double rel_tol = 1e-12) {
  Eigen::Index rank = 0;
  const double cut = svd.sigmas.size() > 0 ? rel_tol * svd.sigmas[0] : 0.0;
  while (rank < svd.sigmas.size() && svd.sigmas[rank] > cut) ++rank;
  DenseSystem sys{svd.sigmas.head(rank), DenseBasis(svd.u.leftCols(rank)),
                  DenseRightBasis(svd.v)};
  sys.validate();
  return sys;
}

}  // namespace gcv
