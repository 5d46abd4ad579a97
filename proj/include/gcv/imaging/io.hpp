#pragma once

// Binary PGM images with a linear-rescaling sidecar, and CSV sinograms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcv/imaging/image.hpp"

namespace gcv::imaging {

/// pixel = offset + scale * gray.
struct GrayScale {
  double offset = 0.0;
  double scale = 1.0;
};

inline std::filesystem::path scale_sidecar(const std::filesystem::path& pgm) {
  auto p = pgm;
  p += ".scale";
  return p;
}

/// Writes an 8- or 16-bit P5 image spanning [min, max] of the input and a
/// sidecar holding the offset and scale needed to undo the quantization.
inline GrayScale write_pgm(const std::filesystem::path& path, const Image& image, int bits = 16) {
  if (bits != 8 && bits != 16) throw std::invalid_argument("pgm depth must be 8 or 16 bits");
  if (image.size() == 0) throw std::invalid_argument("cannot write an empty image");
  const int maxval = bits == 8 ? 255 : 65535;
  const double lo = image.minCoeff(), hi = image.maxCoeff();
  GrayScale gs{lo, hi > lo ? (hi - lo) / maxval : 1.0};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << '\n' << maxval << '\n';
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const long q = std::lround((image(i, j) - gs.offset) / gs.scale);
      const auto v = static_cast<std::uint16_t>(std::clamp<long>(q, 0, maxval));
      if (bits == 16) out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
  }
  std::ofstream side(scale_sidecar(path));
  side.precision(17);
  side << "offset " << gs.offset << "\nscale " << gs.scale << '\n';
  return gs;
}

namespace detail {

inline std::string pgm_token(std::istream& in) {
  std::string tok;
  while (in >> std::ws && in.peek() == '#') {
    std::string skip;
    std::getline(in, skip);
  }
  in >> tok;
  return tok;
}

}  // namespace detail

/// Reads a P5 image.  Gray levels are mapped back through the sidecar when one
/// exists, otherwise returned as raw integers.
inline Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (detail::pgm_token(in) != "P5") throw std::runtime_error("not a binary pgm: " + path.string());
  const long width = std::stol(detail::pgm_token(in));
  const long height = std::stol(detail::pgm_token(in));
  const long maxval = std::stol(detail::pgm_token(in));
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw std::runtime_error("bad pgm header: " + path.string());
  in.get();
  GrayScale gs;
  if (std::ifstream side(scale_sidecar(path)); side) {
    std::string key;
    double value = 0.0;
    while (side >> key >> value) {
      if (key == "offset") gs.offset = value;
      if (key == "scale") gs.scale = value;
    }
  }
  Image img(height, width);
  for (long i = 0; i < height; ++i) {
    for (long j = 0; j < width; ++j) {
      unsigned v = static_cast<unsigned char>(in.get());
      if (maxval > 255) v = (v << 8) | static_cast<unsigned char>(in.get());
      img(i, j) = gs.offset + gs.scale * v;
    }
  }
  if (!in) throw std::runtime_error("truncated pgm: " + path.string());
  return img;
}

/// One row per angle, one column per detector bin.
inline void write_csv(const std::filesystem::path& path, const Image& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) out << (j ? "," : "") << table(i, j);
    out << '\n';
  }
}

inline Image read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged csv: " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Image();
  Image out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

}  // namespace gcv::imaging
