#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avae/tensor.hpp"

namespace avae {

/// Seeded engine whose full state can be saved and restored as text.
/// Distributions are constructed per call so the engine is the only state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::mt19937_64& engine() noexcept { return engine_; }

  template <typename T>
  Tensor<T> normal(Shape shape, double mean = 0.0, double stddev = 1.0) {
    Tensor<T> out(std::move(shape));
    std::normal_distribution<double> dist(mean, stddev);
    for (auto& v : out.data()) v = static_cast<T>(dist(engine_));
    return out;
  }

  /// Normal draws re-sampled until within [-2 stddev, 2 stddev].
  template <typename T>
  Tensor<T> truncated_normal(Shape shape, double stddev) {
    Tensor<T> out(std::move(shape));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& v : out.data()) {
      double d;
      do d = dist(engine_);
      while (d < -2.0 || d > 2.0);
      v = static_cast<T>(d * stddev);
    }
    return out;
  }

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  std::string save() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a seed with a stream index (epoch, split, ...) into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace avae
