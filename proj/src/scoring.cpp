#include "avae/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "avae/adam.hpp"
#include "avae/dataset.hpp"
#include "avae/ops.hpp"

namespace avae {

namespace {

double sorted_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

Tensor<float> rows_of(const Tensor<float>& images, std::span<const std::size_t> idx) {
  const std::size_t per = images.size() / images.dim(0);
  Shape shape = images.shape();
  shape[0] = idx.size();
  Tensor<float> out(shape);
  for (std::size_t i = 0; i < idx.size(); ++i)
    std::copy_n(images.data().begin() + idx[i] * per, per, out.data().begin() + i * per);
  return out;
}

std::string widths_str(const std::array<std::size_t, 3>& w) {
  return std::to_string(w[0]) + "," + std::to_string(w[1]) + "," + std::to_string(w[2]);
}

}  // namespace

Classifier::Classifier(std::size_t image_size, std::size_t channels, std::size_t classes,
                       std::array<std::size_t, 3> widths, Rng& rng)
    : image_size_(image_size), channels_(channels), classes_(classes), widths_(widths) {
  if (image_size == 0 || image_size % 8 != 0) {
    throw UsageError("classifier input side must be a positive multiple of 8");
  }
  if (classes < 2) throw UsageError("classifier needs at least two classes");
  std::size_t in = channels;
  for (std::size_t i = 0; i < 3; ++i) {
    if (widths[i] == 0) throw UsageError("classifier widths must be positive");
    convs_[i] = ConvLayer<float>::init(in, widths[i], rng);
    in = widths[i];
  }
  const std::size_t side = image_size / 8;
  head_ = AffineLayer<float>::init(widths[2] * side * side, classes, rng);
}

Var<float> Classifier::logits(const Var<float>& x) const {
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != channels_ || s[2] != image_size_ || s[3] != image_size_) {
    throw DimensionError("classifier expects [B," + std::to_string(channels_) + "," +
                         std::to_string(image_size_) + "," + std::to_string(image_size_) +
                         "], got " + shape_str(s));
  }
  Var<float> h = x;
  for (const auto& conv : convs_) h = downsample(elu(conv(h)));
  return head_(reshape(h, Shape{s[0], h.value().size() / s[0]}));
}

Tensor<double> Classifier::probabilities(const Tensor<float>& images, std::size_t chunk) const {
  const std::size_t b = images.dim(0);
  Tensor<double> out(Shape{b, classes_});
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < b; start += chunk) {
    const std::size_t m = std::min(chunk, b - start);
    idx.resize(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = start + i;
    const auto logit = logits(Var<float>::constant(rows_of(images, idx))).value().cast<double>();
    const auto p = softmax_rows(logit);
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + start * classes_);
  }
  return out;
}

std::vector<int> Classifier::predict(const Tensor<float>& images) const {
  const auto p = probabilities(images);
  std::vector<int> out(images.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto row = p.data().subspan(i * classes_, classes_);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

NamedParams<float> Classifier::named_parameters() const {
  NamedParams<float> out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.emplace_back("conv" + std::to_string(i) + ".kernel", convs_[i].kernel);
    out.emplace_back("conv" + std::to_string(i) + ".bias", convs_[i].bias);
  }
  out.emplace_back("head.weight", head_.weight);
  out.emplace_back("head.bias", head_.bias);
  return out;
}

double accuracy(const Classifier& model, const Tensor<float>& images,
                const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  const auto pred = model.predict(images);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

Classifier train_classifier(const Tensor<float>& images, const std::vector<int>& labels,
                            const ClassifierConfig& cfg, ClassifierReport* report) {
  if (images.rank() != 4 || images.dim(0) != labels.size()) {
    throw DimensionError("train_classifier: need one label per image");
  }
  if (images.dim(2) != images.dim(3)) throw DimensionError("train_classifier: images must be square");
  if (cfg.batch == 0 || cfg.epochs == 0) throw UsageError("classifier batch and epochs must be >= 1");
  int max_label = -1;
  std::set<int> present;
  for (int l : labels) {
    if (l < 0) throw UsageError("train_classifier: negative label");
    present.insert(l);
    max_label = std::max(max_label, l);
  }
  if (present.size() < 2) throw UsageError("train_classifier: need at least two classes");

  Rng rng(derive_seed(cfg.seed, 10));
  Classifier model(images.dim(2), images.dim(1), static_cast<std::size_t>(max_label) + 1,
                   cfg.widths, rng);
  const Split split = split_indices(labels.size(), cfg.held_out, cfg.seed);
  if (split.train.size() < cfg.batch) throw UsageError("train_classifier: fewer images than one batch");
  Adam<float> opt(values_of(model.named_parameters()), AdamOptions{cfg.lr, 0.9, 0.999, 1e-8});
  BatchIterator batches(split.train.size(), cfg.batch, derive_seed(cfg.seed, 11));
  const std::size_t steps = cfg.epochs * (split.train.size() / cfg.batch);
  std::vector<std::size_t> rows(cfg.batch);
  std::vector<int> batch_labels(cfg.batch);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto idx = batches.next();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      rows[i] = split.train[idx[i]];
      batch_labels[i] = labels[rows[i]];
    }
    auto loss = cross_entropy(model.logits(Var<float>::constant(rows_of(images, rows))),
                              std::span<const int>(batch_labels));
    loss.backward();
    opt.step();
  }

  if (report) {
    auto eval = [&](const std::vector<std::size_t>& idx) {
      std::vector<int> l(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) l[i] = labels[idx[i]];
      return idx.empty() ? 0.0 : accuracy(model, rows_of(images, idx), l);
    };
    report->train_accuracy = eval(split.train);
    report->held_out_accuracy = eval(split.held_out);
    report->train_count = split.train.size();
    report->held_out_count = split.held_out.size();
  }
  return model;
}

void store_classifier(Checkpoint& ckpt, const Classifier& model) {
  ckpt.metadata["clf.image_size"] = std::to_string(model.image_size());
  ckpt.metadata["clf.channels"] = std::to_string(model.channels());
  ckpt.metadata["clf.classes"] = std::to_string(model.classes());
  ckpt.metadata["clf.widths"] = widths_str(model.widths());
  for (const auto& [name, v] : model.named_parameters()) ckpt.put("clf/" + name, v.value());
}

Classifier load_classifier(const Checkpoint& ckpt) {
  std::array<std::size_t, 3> widths{};
  const std::string w = ckpt.meta("clf.widths");
  if (std::sscanf(w.c_str(), "%zu,%zu,%zu", &widths[0], &widths[1], &widths[2]) != 3) {
    throw FormatError("bad classifier widths '" + w + "'");
  }
  Rng rng(0);
  Classifier model(parse_uint(ckpt.meta("clf.image_size")), parse_uint(ckpt.meta("clf.channels")),
                   parse_uint(ckpt.meta("clf.classes")), widths, rng);
  for (const auto& [name, v] : model.named_parameters()) {
    const auto& t = ckpt.tensor("clf/" + name);
    require_same_shape(t.shape(), v.shape(), name.c_str());
    Var<float>(v).mutable_value() = t;
  }
  return model;
}

std::string ScoreReport::format() const {
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "%.17g", score);
  out += std::string("score: ") + buf + "\n";
  out += "splits: " + std::to_string(splits) + "\n";
  out += "samples: " + std::to_string(samples) + "\n";
  out += "split_scores:";
  for (double s : split_scores) {
    std::snprintf(buf, sizeof buf, " %.17g", s);
    out += buf;
  }
  return out + "\n";
}

ScoreReport inception_score_from_probs(const Tensor<double>& probs, std::size_t splits) {
  if (probs.rank() != 2) throw DimensionError("inception score expects [samples, classes]");
  const std::size_t m = probs.dim(0), c = probs.dim(1);
  if (splits == 0) throw UsageError("splits must be >= 1");
  if (m < splits) {
    throw UsageError("need at least as many samples as splits (" + std::to_string(m) + " < " +
                     std::to_string(splits) + ")");
  }
  ScoreReport r;
  r.splits = splits;
  r.samples = m;
  auto p = probs.data();
  std::vector<double> column, kl;
  for (std::size_t s = 0; s < splits; ++s) {
    const std::size_t lo = s * m / splits, hi = (s + 1) * m / splits, n = hi - lo;
    std::vector<double> marginal(c);
    for (std::size_t y = 0; y < c; ++y) {
      column.clear();
      for (std::size_t i = lo; i < hi; ++i) column.push_back(p[i * c + y]);
      marginal[y] = sorted_sum(column) / static_cast<double>(n);
    }
    kl.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      column.clear();
      for (std::size_t y = 0; y < c; ++y) {
        const double q = p[i * c + y];
        if (q > 0.0) column.push_back(q * (std::log(q) - std::log(marginal[y])));
      }
      kl.push_back(sorted_sum(column));
    }
    r.split_scores.push_back(std::exp(sorted_sum(kl) / static_cast<double>(n)));
  }
  double total = 0.0;
  for (double v : r.split_scores) total += v;
  r.score = total / static_cast<double>(splits);
  return r;
}

ScoreReport inception_score(const Tensor<float>& samples, const Classifier& model,
                            std::size_t splits) {
  if (samples.rank() != 4) throw DimensionError("inception score expects [B,C,S,S] samples");
  if (samples.dim(0) < splits) {
    throw UsageError("need at least as many samples as splits (" +
                     std::to_string(samples.dim(0)) + " < " + std::to_string(splits) + ")");
  }
  return inception_score_from_probs(model.probabilities(samples), splits);
}

}  // namespace avae
