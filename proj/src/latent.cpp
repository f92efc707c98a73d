#include "avae/latent.hpp"

#include <algorithm>

namespace avae {

namespace {

void require_width(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": latent widths differ (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

std::vector<double> sorted_means(const std::vector<Latent>& set, std::size_t width) {
  std::vector<double> out(width), column(set.size());
  for (std::size_t j = 0; j < width; ++j) {
    for (std::size_t i = 0; i < set.size(); ++i) column[i] = set[i][j];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    out[j] = s / static_cast<double>(set.size());
  }
  return out;
}

const std::string kAttrPrefix = "attr/";

}  // namespace

std::vector<Latent> interpolate(const Latent& z_a, const Latent& z_b, std::size_t steps) {
  require_width(z_a.size(), z_b.size(), "interpolate");
  if (steps < 2) throw UsageError("interpolate needs at least 2 steps");
  std::vector<Latent> out;
  out.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
    Latent z(z_a.shape());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = (1.0 - t) * z_a[j] + t * z_b[j];
    out.push_back(std::move(z));
  }
  return out;
}

AttributeVector build_attribute(const std::vector<Latent>& with,
                                const std::vector<Latent>& without, std::string name) {
  if (with.empty() || without.empty()) {
    throw UsageError("attribute '" + name + "' needs images both with and without it");
  }
  const std::size_t width = with.front().size();
  for (const auto& z : with) require_width(z.size(), width, "build_attribute");
  for (const auto& z : without) require_width(z.size(), width, "build_attribute");
  const auto pos = sorted_means(with, width), neg = sorted_means(without, width);
  AttributeVector attr{std::move(name), Tensor<float>(Shape{width}), with.size(), without.size()};
  for (std::size_t j = 0; j < width; ++j) attr.vector[j] = static_cast<float>(pos[j] - neg[j]);
  return attr;
}

Latent apply_attribute(const Latent& z, const AttributeVector& attr, double weight) {
  require_width(z.size(), attr.vector.size(), "apply_attribute");
  Latent out(z.shape());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const float offset = static_cast<float>(weight * static_cast<double>(attr.vector[j]));
    out[j] = z[j] + static_cast<double>(offset);
  }
  return out;
}

Latent latent_from(const Tensor<float>& row) {
  return Latent(Shape{row.size()}, std::vector<double>(row.data().begin(), row.data().end()));
}

std::vector<Latent> encode_means(const Generator<float>& gen, const Tensor<float>& images,
                                 std::size_t chunk) {
  if (images.rank() != 4) throw DimensionError("encode_means expects [B,C,S,S] images");
  const std::size_t b = images.dim(0), per = images.size() / b;
  const std::size_t n = gen.arch().latent_dim;
  std::vector<Latent> out;
  out.reserve(b);
  for (std::size_t start = 0; start < b; start += chunk) {
    const std::size_t m = std::min(chunk, b - start);
    Shape shape = images.shape();
    shape[0] = m;
    std::vector<float> part(images.data().begin() + start * per,
                            images.data().begin() + (start + m) * per);
    const auto mu = gen.encode(Var<float>::constant(Tensor<float>(shape, std::move(part)))).mu.value();
    for (std::size_t i = 0; i < m; ++i) {
      out.emplace_back(Shape{n}, std::vector<double>(mu.data().begin() + i * n,
                                                     mu.data().begin() + (i + 1) * n));
    }
  }
  return out;
}

Tensor<float> decode_latents(const Generator<float>& gen, const std::vector<Latent>& latents) {
  if (latents.empty()) throw UsageError("decode_latents: no latents");
  const std::size_t n = gen.arch().latent_dim;
  Tensor<float> z(Shape{latents.size(), n});
  for (std::size_t i = 0; i < latents.size(); ++i) {
    require_width(latents[i].size(), n, "decode_latents");
    for (std::size_t j = 0; j < n; ++j) z[i * n + j] = static_cast<float>(latents[i][j]);
  }
  return gen.decode(Var<float>::constant(std::move(z))).value();
}

void store_attribute(Checkpoint& ckpt, const AttributeVector& attr) {
  if (attr.name.empty() || attr.name.find_first_of("/.") != std::string::npos) {
    throw UsageError("attribute names must be non-empty and free of '/' and '.'");
  }
  ckpt.put(kAttrPrefix + attr.name, attr.vector);
  ckpt.metadata["attr." + attr.name + ".positives"] = std::to_string(attr.positives);
  ckpt.metadata["attr." + attr.name + ".negatives"] = std::to_string(attr.negatives);
}

AttributeVector load_attribute(const Checkpoint& ckpt, const std::string& name) {
  if (!ckpt.has_tensor(kAttrPrefix + name)) {
    throw UsageError("checkpoint holds no attribute '" + name + "'");
  }
  AttributeVector attr;
  attr.name = name;
  attr.vector = ckpt.tensor(kAttrPrefix + name);
  attr.positives = parse_uint(ckpt.meta("attr." + name + ".positives"));
  attr.negatives = parse_uint(ckpt.meta("attr." + name + ".negatives"));
  return attr;
}

std::vector<std::string> stored_attributes(const Checkpoint& ckpt) {
  std::vector<std::string> out;
  for (const auto& [name, _] : ckpt.tensors)
    if (name.rfind(kAttrPrefix, 0) == 0) out.push_back(name.substr(kAttrPrefix.size()));
  return out;
}

}  // namespace avae
