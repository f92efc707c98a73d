#include "avae/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "avae/image_io.hpp"
#include "avae/random.hpp"

namespace avae {

namespace {

bool inside(int shape, double u, double v) {
  const double au = std::abs(u), av = std::abs(v);
  switch (shape) {
    case 0: return au <= 0.85 && av <= 0.85;
    case 1: return u * u + v * v <= 1.0;
    case 2: return v >= -0.9 && v <= 0.9 && au <= (v + 0.9) * 0.6;
    case 3: { const double r2 = u * u + v * v; return r2 <= 1.0 && r2 >= 0.3; }
    case 4: return (au <= 0.3 && av <= 1.0) || (av <= 0.3 && au <= 1.0);
    case 5: {
      const double a = std::abs(u + v) * M_SQRT1_2, b = std::abs(u - v) * M_SQRT1_2;
      return (a <= 0.25 && b <= 1.0) || (b <= 0.25 && a <= 1.0);
    }
    case 6: return au <= 1.0 && av <= 0.35;
    case 7: return av <= 1.0 && au <= 0.35;
    case 8: return au + av <= 1.0;
    case 9: return au <= 0.9 && av <= 0.9 && (au >= 0.5 || av >= 0.5);
  }
  return false;
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double f = h * 6.0;
  const int i = static_cast<int>(f) % 6;
  const double frac = f - std::floor(f);
  const double p = v * (1 - s), q = v * (1 - s * frac), t = v * (1 - s * (1 - frac));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

}  // namespace

SynthImage synth_image(std::size_t image_size, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, index));
  const double s = static_cast<double>(image_size);
  SynthImage img;
  img.label = static_cast<int>(rng.engine()() % kShapeNames.size());
  const double radius = rng.uniform(0.15, 0.38) * s;
  const double cx = rng.uniform(radius, s - radius);
  const double cy = rng.uniform(radius, s - radius);
  const double hue = rng.uniform();
  const auto colour = hsv_to_rgb(hue, rng.uniform(0.6, 1.0), rng.uniform(0.7, 1.0));
  const double grey = rng.uniform(0.0, 0.3);
  img.flags = {radius > 0.265 * s, hue < 1.0 / 6.0 || hue > 11.0 / 12.0, cx < 0.5 * s};

  img.pixels = Tensor<float>(Shape{3, image_size, image_size});
  auto d = img.pixels.data();
  const std::size_t plane = image_size * image_size;
  constexpr int kSub = 4;
  for (std::size_t y = 0; y < image_size; ++y) {
    for (std::size_t x = 0; x < image_size; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSub; ++sy)
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = x + (sx + 0.5) / kSub, py = y + (sy + 0.5) / kSub;
          hits += inside(img.label, (px - cx) / radius, (py - cy) / radius);
        }
      const double cover = static_cast<double>(hits) / (kSub * kSub);
      for (std::size_t c = 0; c < 3; ++c) {
        // Quantize so the files round-trip exactly.
        const double v = cover * colour[c] + (1 - cover) * grey;
        d[c * plane + y * image_size + x] = static_cast<float>(to_byte(static_cast<float>(v))) / 255.0f;
      }
    }
  }
  return img;
}

void write_synth_dataset(const std::filesystem::path& dir, const SynthOptions& opt) {
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.csv"), attrs(dir / "attributes.csv");
  if (!labels || !attrs) throw FormatError("cannot write tables in " + dir.string());
  labels << "file,label\n";
  attrs << "file";
  for (const char* a : kSynthAttributes) attrs << ',' << a;
  attrs << '\n';
  for (std::size_t i = 0; i < opt.count; ++i) {
    SynthImage img = synth_image(opt.image_size, opt.seed, i);
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.png", i);
    write_png(dir / name, from_planar(img.pixels.data(), 3, opt.image_size, opt.image_size));
    labels << name << ',' << img.label << '\n';
    attrs << name;
    for (bool f : img.flags) attrs << (f ? ",1" : ",-1");
    attrs << '\n';
  }
  if (!labels || !attrs) throw FormatError("failed writing tables in " + dir.string());
}

}  // namespace avae
