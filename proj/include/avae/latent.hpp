#pragma once

#include <string>
#include <vector>

#include "avae/checkpoint.hpp"
#include "avae/generator.hpp"

namespace avae {

/// Latent codes are handled in double. Codes produced by the encoder are
/// float-valued, and attribute offsets are rounded to float before they are
/// added, so that z + w*v is computed without rounding and applying -w
/// afterwards gives back z bit for bit.
using Latent = Tensor<double>;  // [N]

struct AttributeVector {
  std::string name;
  Tensor<float> vector;  // [N], mean(with) - mean(without)
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// z(t) = (1-t) z_a + t z_b at t = i/(steps-1), i = 0..steps-1.
std::vector<Latent> interpolate(const Latent& z_a, const Latent& z_b, std::size_t steps);

/// Mean of `with` minus mean of `without`, per coordinate. Each coordinate is
/// summed in sorted order, so the result depends only on the two multisets.
AttributeVector build_attribute(const std::vector<Latent>& with,
                                const std::vector<Latent>& without, std::string name);

/// z + weight * attr.vector, with the offset rounded to float first.
Latent apply_attribute(const Latent& z, const AttributeVector& attr, double weight);

/// Posterior means (epsilon = 0) of [B,C,S,S] images, one latent per image.
std::vector<Latent> encode_means(const Generator<float>& gen, const Tensor<float>& images,
                                 std::size_t chunk = 64);
/// Decodes latents (rounded to float) into [B,C,S,S] images.
Tensor<float> decode_latents(const Generator<float>& gen, const std::vector<Latent>& latents);

Latent latent_from(const Tensor<float>& row);

/// Attribute records inside a checkpoint: tensor "attr/<name>" and metadata
/// "attr.<name>.positives" / ".negatives".
void store_attribute(Checkpoint& ckpt, const AttributeVector& attr);
AttributeVector load_attribute(const Checkpoint& ckpt, const std::string& name);
std::vector<std::string> stored_attributes(const Checkpoint& ckpt);

}  // namespace avae
