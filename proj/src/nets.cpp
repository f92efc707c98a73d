#include "avae/nets.hpp"

#include <cmath>

#include "avae/ops.hpp"

namespace avae {

void ArchConfig::validate() const {
  const bool pow2 = image_size >= 8 && (image_size & (image_size - 1)) == 0;
  if (!pow2) {
    throw UsageError("image_size must be a power of two >= 8, got " + std::to_string(image_size));
  }
  if (channels == 0 || latent_dim == 0) throw UsageError("channels and latent_dim must be >= 1");
  for (auto w : widths)
    if (w == 0) throw UsageError("filter widths must be >= 1");
}

double init_stddev(std::size_t fan_in) {
  // 0.8796 is the standard deviation of a unit normal truncated at +-2.
  return std::sqrt(2.0 / static_cast<double>(fan_in)) / 0.8796;
}

template <typename T>
ConvLayer<T> ConvLayer<T>::init(std::size_t in, std::size_t out, Rng& rng) {
  return {Var<T>::leaf(rng.truncated_normal<T>(Shape{out, in, 3, 3}, init_stddev(in * 9))),
          Var<T>::leaf(Tensor<T>(Shape{out}, T(0)))};
}

template <typename T>
Var<T> ConvLayer<T>::operator()(const Var<T>& x) const {
  return add_bias(conv2d(x, kernel, 1, 1), bias);
}

template <typename T>
AffineLayer<T> AffineLayer<T>::init(std::size_t in, std::size_t out, Rng& rng) {
  return {Var<T>::leaf(rng.truncated_normal<T>(Shape{out, in}, init_stddev(in))),
          Var<T>::leaf(Tensor<T>(Shape{out}, T(0)))};
}

template <typename T>
Var<T> AffineLayer<T>::operator()(const Var<T>& x) const {
  return linear(x, weight, bias);
}

template <typename T>
ConvEncoder<T>::ConvEncoder(const ArchConfig& arch, Rng& rng) : arch_(arch) {
  arch_.validate();
  const auto& w = arch_.widths;
  const std::size_t ins[6] = {arch_.channels, w[0], w[0], w[1], w[1], w[2]};
  const std::size_t outs[6] = {w[0], w[0], w[1], w[1], w[2], w[2]};
  for (std::size_t i = 0; i < 6; ++i) convs_[i] = ConvLayer<T>::init(ins[i], outs[i], rng);
}

template <typename T>
Var<T> ConvEncoder<T>::operator()(const Var<T>& x) const {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != arch_.channels || s[2] != arch_.image_size ||
      s[3] != arch_.image_size) {
    throw DimensionError("encoder expects [B," + std::to_string(arch_.channels) + "," +
                         std::to_string(arch_.image_size) + "," +
                         std::to_string(arch_.image_size) + "], got " + shape_str(s));
  }
  Var<T> h = x;
  for (std::size_t i = 0; i < 6; ++i) {
    h = elu(convs_[i](h));
    if (i == 1 || i == 3) h = downsample(h);
  }
  return reshape(h, Shape{s[0], arch_.flat_features()});
}

template <typename T>
void ConvEncoder<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  for (std::size_t i = 0; i < 6; ++i) {
    out.emplace_back(prefix + "conv" + std::to_string(i) + ".kernel", convs_[i].kernel);
    out.emplace_back(prefix + "conv" + std::to_string(i) + ".bias", convs_[i].bias);
  }
}

template <typename T>
ConvDecoder<T>::ConvDecoder(const ArchConfig& arch, Rng& rng) : arch_(arch) {
  arch_.validate();
  const auto& w = arch_.widths;
  seed_ = AffineLayer<T>::init(arch_.latent_dim, arch_.flat_features(), rng);
  const std::size_t ins[6] = {w[2], w[2], w[2], w[1], w[1], w[0]};
  const std::size_t outs[6] = {w[2], w[2], w[1], w[1], w[0], w[0]};
  for (std::size_t i = 0; i < 6; ++i) convs_[i] = ConvLayer<T>::init(ins[i], outs[i], rng);
  output_ = ConvLayer<T>::init(w[0], arch_.channels, rng);
}

template <typename T>
Var<T> ConvDecoder<T>::operator()(const Var<T>& z) const {
  const Shape& s = z.shape();
  if (s.size() != 2 || s[1] != arch_.latent_dim) {
    throw DimensionError("decoder expects [B," + std::to_string(arch_.latent_dim) + "], got " +
                         shape_str(s));
  }
  const std::size_t side = arch_.seed_size();
  Var<T> h = reshape(seed_(z), Shape{s[0], arch_.widths[2], side, side});
  for (std::size_t i = 0; i < 6; ++i) {
    h = elu(convs_[i](h));
    if (i == 1 || i == 3) h = upsample(h);
  }
  return sigmoid(output_(h));
}

template <typename T>
void ConvDecoder<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  out.emplace_back(prefix + "seed.weight", seed_.weight);
  out.emplace_back(prefix + "seed.bias", seed_.bias);
  for (std::size_t i = 0; i < 6; ++i) {
    out.emplace_back(prefix + "conv" + std::to_string(i) + ".kernel", convs_[i].kernel);
    out.emplace_back(prefix + "conv" + std::to_string(i) + ".bias", convs_[i].bias);
  }
  out.emplace_back(prefix + "out.kernel", output_.kernel);
  out.emplace_back(prefix + "out.bias", output_.bias);
}

template struct ConvLayer<float>;
template struct ConvLayer<double>;
template struct AffineLayer<float>;
template struct AffineLayer<double>;
template class ConvEncoder<float>;
template class ConvEncoder<double>;
template class ConvDecoder<float>;
template class ConvDecoder<double>;

}  // namespace avae
