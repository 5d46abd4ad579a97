#pragma once

// Seeded random streams.  A stream is identified by a master seed plus a path
// of integers (experiment tag, smoothness index, SNR index, trial index, ...),
// so every trial owns an independent, reproducible substream no matter which
// worker thread runs it.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <Eigen/Dense>

namespace gcv {

class Stream {
 public:
  explicit Stream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path = {})
      : engine_(make_engine(master_seed, std::vector<std::uint64_t>(path))) {}

  Stream(std::uint64_t master_seed, const std::vector<std::uint64_t>& path)
      : engine_(make_engine(master_seed, path)) {}

  /// Standard normal draw, Boost ziggurat sampler.
  double normal() { return normal_(engine_); }

  /// Uniform draw on [0, 1).
  double uniform() { return uniform_(engine_); }

  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static std::mt19937_64 make_engine(std::uint64_t master, const std::vector<std::uint64_t>& path) {
    std::vector<std::uint32_t> words;
    auto push = [&](std::uint64_t v) {
      words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
      words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master);
    push(static_cast<std::uint64_t>(path.size()));
    for (auto v : path) push(v);
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{};
  boost::random::uniform_01<double> uniform_{};
};

/// Path components that keep the streams of different purposes apart.
namespace stream_tag {
inline constexpr std::uint64_t source = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t phantom = 3;
inline constexpr std::uint64_t monte_carlo = 4;
}  // namespace stream_tag

}  // namespace gcv
