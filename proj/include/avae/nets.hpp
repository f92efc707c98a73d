#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "avae/autodiff.hpp"
#include "avae/random.hpp"

namespace avae {

/// Shared architecture of both auto-encoders: three pairs of 3x3 conv+ELU
/// layers interleaved with 2x down- (encoder) or up-sampling (decoder).
struct ArchConfig {
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t latent_dim = 64;
  std::array<std::size_t, 3> widths{32, 64, 128};

  /// Spatial side of the innermost feature map.
  std::size_t seed_size() const noexcept { return image_size / 4; }
  std::size_t flat_features() const noexcept { return widths[2] * seed_size() * seed_size(); }
  /// Throws UsageError for a non power-of-two size below 8 or zero widths.
  void validate() const;
};

template <typename T>
using NamedParams = std::vector<std::pair<std::string, Var<T>>>;

/// Weights start as truncated normals with variance 2 / fan_in (biases at 0),
/// which keeps activation scale roughly constant through the ELU stacks.
double init_stddev(std::size_t fan_in);

template <typename T>
struct ConvLayer {
  Var<T> kernel;  // [out, in, 3, 3]
  Var<T> bias;    // [out]

  static ConvLayer init(std::size_t in, std::size_t out, Rng& rng);
  Var<T> operator()(const Var<T>& x) const;
};

template <typename T>
struct AffineLayer {
  Var<T> weight;  // [out, in]
  Var<T> bias;    // [out]

  static AffineLayer init(std::size_t in, std::size_t out, Rng& rng);
  Var<T> operator()(const Var<T>& x) const;
};

/// Convolutional trunk of an encoder. Maps [B,C,S,S] to [B, flat_features].
template <typename T>
class ConvEncoder {
 public:
  ConvEncoder(const ArchConfig& arch, Rng& rng);
  Var<T> operator()(const Var<T>& x) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

 private:
  ArchConfig arch_;
  std::array<ConvLayer<T>, 6> convs_;
};

/// Decoder: affine seed map, conv pairs with upsampling, then a 3x3 output
/// conv squashed to (0,1) by a logistic.
template <typename T>
class ConvDecoder {
 public:
  ConvDecoder(const ArchConfig& arch, Rng& rng);
  Var<T> operator()(const Var<T>& z) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

 private:
  ArchConfig arch_;
  AffineLayer<T> seed_;
  std::array<ConvLayer<T>, 6> convs_;
  ConvLayer<T> output_;
};

template <typename T>
Params<T> values_of(const NamedParams<T>& named) {
  Params<T> out;
  out.reserve(named.size());
  for (const auto& [_, v] : named) out.push_back(v);
  return out;
}

extern template struct ConvLayer<float>;
extern template struct ConvLayer<double>;
extern template struct AffineLayer<float>;
extern template struct AffineLayer<double>;
extern template class ConvEncoder<float>;
extern template class ConvEncoder<double>;
extern template class ConvDecoder<float>;
extern template class ConvDecoder<double>;

}  // namespace avae
