#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

namespace gcv::imaging {

/// Images are stored row-major, pixel (i, j) at row i, column j.
using Image = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Row-major stacking: u[alpha] = f[i, j] with alpha = i W + j.
inline Eigen::VectorXd vectorize(const Image& image) {
  return Eigen::Map<const Eigen::VectorXd>(image.data(), image.size());
}

inline Image devectorize(const Eigen::VectorXd& u, Eigen::Index height, Eigen::Index width) {
  if (height < 1 || width < 1 || u.size() != height * width)
    throw std::invalid_argument("devectorize: vector length does not match the image size");
  return Eigen::Map<const Image>(u.data(), height, width);
}

struct PixelIndex {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

inline PixelIndex pixel_of(Eigen::Index alpha, Eigen::Index width) {
  return {alpha / width, alpha % width};
}

/// Mean over non-overlapping factor x factor blocks.
inline Image block_average(const Image& fine, int factor) {
  if (factor < 1 || fine.rows() % factor != 0 || fine.cols() % factor != 0)
    throw std::invalid_argument("block_average: image size is not a multiple of the factor");
  Image out(fine.rows() / factor, fine.cols() / factor);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = fine.block(i * factor, j * factor, factor, factor).mean();
  return out;
}

}  // namespace gcv::imaging
