#include "avae/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

namespace avae {

namespace {

std::string png_failure(const std::filesystem::path& path, const png_image& image,
                        const char* what) {
  return std::string(what) + " " + path.string() + ": " + image.message;
}

}  // namespace

Raster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError(png_failure(path, image, "cannot read"));
  }
  Raster r;
  r.width = image.width;
  r.height = image.height;
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  r.channels = colour ? 3 : 1;
  image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr)) {
    std::string msg = png_failure(path, image, "cannot decode");
    png_image_free(&image);
    throw FormatError(msg);
  }
  return r;
}

void write_png(const std::filesystem::path& path, const Raster& r) {
  if (r.channels != 1 && r.channels != 3) throw UsageError("write_png: need 1 or 3 channels");
  if (r.pixels.size() != r.width * r.height * r.channels) {
    throw DimensionError("write_png: pixel buffer does not match dimensions");
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width);
  image.height = static_cast<png_uint_32>(r.height);
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, r.pixels.data(), 0, nullptr)) {
    throw FormatError(png_failure(path, image, "cannot write"));
  }
}

std::uint8_t to_byte(float v) {
  const float c = std::clamp(std::isnan(v) ? 0.0f : v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

Tensor<float> to_planar(const Raster& r) {
  Tensor<float> out(Shape{r.channels, r.height, r.width});
  auto d = out.data();
  const std::size_t plane = r.height * r.width;
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < r.channels; ++c)
      d[c * plane + p] = static_cast<float>(r.pixels[p * r.channels + c]) / 255.0f;
  return out;
}

Raster from_planar(std::span<const float> planar, std::size_t channels, std::size_t height,
                   std::size_t width) {
  const std::size_t plane = height * width;
  if (planar.size() != channels * plane) throw DimensionError("from_planar: size mismatch");
  Raster r{width, height, channels, std::vector<std::uint8_t>(planar.size())};
  for (std::size_t p = 0; p < plane; ++p)
    for (std::size_t c = 0; c < channels; ++c)
      r.pixels[p * channels + c] = to_byte(planar[c * plane + p]);
  return r;
}

Raster tile_images(const Tensor<float>& images, std::size_t columns) {
  if (images.rank() != 4) throw DimensionError("image grid needs [B,C,H,W], got " + shape_str(images.shape()));
  if (columns == 0) throw UsageError("image grid needs at least one column");
  const std::size_t b = images.dim(0), c = images.dim(1), h = images.dim(2), w = images.dim(3);
  const std::size_t cols = columns;
  const std::size_t rows = (b + cols - 1) / cols;
  Raster grid{cols * w, rows * h, c, std::vector<std::uint8_t>(rows * h * cols * w * c, 0)};
  const std::size_t per = c * h * w;
  for (std::size_t i = 0; i < b; ++i) {
    Raster tile = from_planar(images.data().subspan(i * per, per), c, h, w);
    const std::size_t y0 = (i / cols) * h, x0 = (i % cols) * w;
    for (std::size_t y = 0; y < h; ++y) {
      std::memcpy(&grid.pixels[((y0 + y) * grid.width + x0) * c], &tile.pixels[y * w * c], w * c);
    }
  }
  return grid;
}

void save_image_grid(const Tensor<float>& images, std::size_t columns,
                     const std::filesystem::path& path) {
  write_png(path, tile_images(images, columns));
}

}  // namespace avae
