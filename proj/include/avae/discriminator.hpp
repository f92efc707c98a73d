#pragma once

#include "avae/nets.hpp"

namespace avae {

/// Latents and reconstructions from one discriminator pass over the real,
/// generated and VAE-reconstructed batches.
template <typename T>
struct DiscPass {
  Var<T> z_d, z_g, z_v;  // encodings of x, x_g, x_v
  Var<T> x_d, x_g, x_v;  // reconstructions x'_d, x'_g, x'_v
};

/// Reconstruction energies of the three inputs.
template <typename T>
struct Energies {
  Var<T> real;   // L_d
  Var<T> fake;   // L_g
  Var<T> recon;  // L_v
};

/// How the fake-sample energy L_g is measured.
enum class FakeEnergy {
  // mean |x_g - x'_g|: the fake's own reconstruction error (default).
  SelfReconstruction,
  // mean |x - x'_g|: the written form that compares against the real batch.
  AgainstReal,
};

/// The discriminator auto-encoder. Same trunk and decoder family as the
/// generator, but the encoder head is a plain affine map to a deterministic
/// latent of the same width N.
template <typename T>
class Discriminator {
 public:
  Discriminator(const ArchConfig& arch, Rng& rng);

  const ArchConfig& arch() const noexcept { return arch_; }

  Var<T> encode(const Var<T>& x) const;
  Var<T> decode(const Var<T>& z) const;

  /// Encodes all three batches, then decodes the three latents.
  DiscPass<T> pass(const Var<T>& x, const Var<T>& x_g, const Var<T>& x_v) const;

  NamedParams<T> encoder_parameters() const;
  NamedParams<T> decoder_parameters() const;
  NamedParams<T> named_parameters() const;

 private:
  ArchConfig arch_;
  ConvEncoder<T> trunk_;
  AffineLayer<T> head_;
  ConvDecoder<T> decoder_;
};

/// L_d, L_g, L_v from images and their discriminator reconstructions.
template <typename T>
Energies<T> reconstruction_energies(const Var<T>& x, const Var<T>& x_g, const Var<T>& x_v,
                                    const Var<T>& rx_d, const Var<T>& rx_g, const Var<T>& rx_v,
                                    FakeEnergy mode = FakeEnergy::SelfReconstruction);

/// Runs the discriminator over the three batches and measures their energies.
template <typename T>
std::pair<Energies<T>, DiscPass<T>> energies(const Discriminator<T>& disc, const Var<T>& x,
                                             const Var<T>& x_g, const Var<T>& x_v,
                                             FakeEnergy mode = FakeEnergy::SelfReconstruction);

/// Perceptual guidance L_s = (1/N) * batch-mean of ||z_d - z'_v||_1.
template <typename T>
Var<T> latent_similarity(const Var<T>& z_d, const Var<T>& z_v);

extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace avae
