#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "avae/tensor.hpp"

namespace avae {

/// Labeled toy images: one coloured shape from ten classes on a dark
/// background, with random size, position and colour.
inline constexpr std::array<const char*, 10> kShapeNames{
    "square", "circle", "triangle", "ring", "plus", "cross", "hbar", "vbar", "diamond", "frame"};
/// Attribute columns written next to the images.
inline constexpr std::array<const char*, 3> kSynthAttributes{"Large", "Warm", "Left"};

struct SynthOptions {
  std::size_t count = 5000;
  std::size_t image_size = 32;
  std::uint64_t seed = 0;
};

struct SynthImage {
  Tensor<float> pixels;  // [3,S,S]
  int label = 0;
  std::array<bool, 3> flags{};
};

/// The i-th image of the stream selected by `seed`. Independent of other
/// indices, so any subset can be regenerated.
SynthImage synth_image(std::size_t image_size, std::uint64_t seed, std::size_t index);

/// Writes NNNNN.png, labels.csv and attributes.csv into `dir` (created if
/// missing).
void write_synth_dataset(const std::filesystem::path& dir, const SynthOptions& options);

}  // namespace avae
