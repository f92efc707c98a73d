#pragma once

#include <cstdint>

#include "avae/nets.hpp"

namespace avae {

/// Bounds applied to the encoder's log-variance before exponentiation.
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

/// Per-sample posterior parameters from the VAE encoder.
template <typename T>
struct GaussianParams {
  Var<T> mu;       // [B,N]
  Var<T> log_var;  // [B,N], already clamped
};

template <typename T>
struct ReparamSample {
  Var<T> z;            // mu + epsilon * exp(0.5 * log_var)
  Tensor<T> epsilon;   // the noise that produced z
};

/// The VAE generator: encoder trunk with mean and log-variance heads, and a
/// decoder mapping latents to images in (0,1).
template <typename T>
class Generator {
 public:
  Generator(const ArchConfig& arch, Rng& rng);

  const ArchConfig& arch() const noexcept { return arch_; }

  GaussianParams<T> encode(const Var<T>& x) const;
  Var<T> decode(const Var<T>& z) const;

  /// theta_e: encoder trunk and both heads.
  NamedParams<T> encoder_parameters() const;
  /// theta_d: decoder.
  NamedParams<T> decoder_parameters() const;
  NamedParams<T> named_parameters() const;

 private:
  ArchConfig arch_;
  ConvEncoder<T> trunk_;
  AffineLayer<T> mu_head_;
  AffineLayer<T> log_var_head_;
  ConvDecoder<T> decoder_;
};

/// z = mu + epsilon * sigma with sigma = exp(0.5 * log_var). Gradients reach
/// mu and log_var; epsilon is a constant.
template <typename T>
ReparamSample<T> reparametrize(const GaussianParams<T>& g, Tensor<T> epsilon);
/// Same, drawing epsilon ~ N(0, I) from `rng`.
template <typename T>
ReparamSample<T> reparametrize(const GaussianParams<T>& g, Rng& rng);

/// Data loss L_e: mean absolute error between x and its reconstruction.
template <typename T>
Var<T> data_loss(const Var<T>& x, const Var<T>& x_v);

/// KL(N(mu, sigma^2) || N(0, I)) in closed form, summed over latent
/// dimensions and averaged over the batch.
template <typename T>
Var<T> kl_loss(const GaussianParams<T>& g);

/// i.i.d. standard-normal latents [batch, latent_dim].
template <typename T>
Tensor<T> sample_prior(std::size_t batch, std::size_t latent_dim, Rng& rng);
template <typename T>
Tensor<T> sample_prior(std::size_t batch, std::size_t latent_dim, std::uint64_t seed);

extern template class Generator<float>;
extern template class Generator<double>;

}  // namespace avae
