#pragma once

#include <array>
#include <string>
#include <vector>

#include "avae/checkpoint.hpp"
#include "avae/nets.hpp"

namespace avae {

struct ClassifierConfig {
  std::array<std::size_t, 3> widths{16, 32, 64};
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t epochs = 20;
  double held_out = 0.1;
  std::uint64_t seed = 0;
};

/// Three conv+ELU blocks, each followed by 2x mean pooling, then an affine
/// map to class logits. Input side must be a multiple of 8.
class Classifier {
 public:
  Classifier(std::size_t image_size, std::size_t channels, std::size_t classes,
             std::array<std::size_t, 3> widths, Rng& rng);

  std::size_t image_size() const noexcept { return image_size_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t classes() const noexcept { return classes_; }
  const std::array<std::size_t, 3>& widths() const noexcept { return widths_; }

  Var<float> logits(const Var<float>& x) const;
  /// Row-stochastic [B, classes] in double, evaluated in chunks.
  Tensor<double> probabilities(const Tensor<float>& images, std::size_t chunk = 128) const;
  std::vector<int> predict(const Tensor<float>& images) const;

  NamedParams<float> named_parameters() const;

 private:
  std::size_t image_size_, channels_, classes_;
  std::array<std::size_t, 3> widths_;
  std::array<ConvLayer<float>, 3> convs_;
  AffineLayer<float> head_;
};

struct ClassifierReport {
  double train_accuracy = 0.0;
  double held_out_accuracy = 0.0;
  std::size_t train_count = 0, held_out_count = 0;
};

/// Trains with Adam on softmax cross-entropy over a seeded split of the
/// labeled images. Labels must lie in [0, classes) with at least two classes
/// present. Deterministic for a given seed.
Classifier train_classifier(const Tensor<float>& images, const std::vector<int>& labels,
                            const ClassifierConfig& config, ClassifierReport* report = nullptr);

double accuracy(const Classifier& model, const Tensor<float>& images,
                const std::vector<int>& labels);

/// Classifier records inside a checkpoint: tensors "clf/<param>", metadata
/// "clf.image_size", "clf.channels", "clf.classes", "clf.widths".
void store_classifier(Checkpoint& ckpt, const Classifier& model);
Classifier load_classifier(const Checkpoint& ckpt);

struct ScoreReport {
  double score = 0.0;
  std::vector<double> split_scores;
  std::size_t splits = 0;
  std::size_t samples = 0;

  /// "key: value" lines.
  std::string format() const;
};

/// exp(mean_x KL(p(y|x) || p(y))) per split, p(y) the split's mean
/// prediction; the report's score is the mean over splits. Sums run in
/// sorted order so the result does not depend on sample order.
ScoreReport inception_score_from_probs(const Tensor<double>& probs, std::size_t splits = 1);
ScoreReport inception_score(const Tensor<float>& samples, const Classifier& model,
                            std::size_t splits = 1);

}  // namespace avae
