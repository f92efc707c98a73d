#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avae/tensor.hpp"

namespace avae {

/// 8-bit interleaved raster, rows top to bottom.
struct Raster {
  std::size_t width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> pixels;  // height * width * channels
};

/// Reads a PNG as grey (1 channel) or RGB (3 channels). Alpha is dropped,
/// palettes expanded. Throws FormatError naming the file on failure.
Raster read_png(const std::filesystem::path& path);
/// Writes grey or RGB. Throws FormatError naming the file on failure.
void write_png(const std::filesystem::path& path, const Raster& raster);

/// Planar [C,H,W] floats in [0,1], v = byte / 255.
Tensor<float> to_planar(const Raster& raster);
/// Inverse of to_planar. Values are clamped to [0,1] and rounded.
Raster from_planar(std::span<const float> planar, std::size_t channels, std::size_t height,
                   std::size_t width);
std::uint8_t to_byte(float v);

/// Tiles [B,C,H,W] images row-major into a ceil(B/columns) x columns grid.
/// Unused cells stay black.
Raster tile_images(const Tensor<float>& images, std::size_t columns);
void save_image_grid(const Tensor<float>& images, std::size_t columns,
                     const std::filesystem::path& path);

}  // namespace avae
