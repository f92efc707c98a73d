#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "avae/scoring.hpp"

using namespace avae;

namespace {

// exp(mean KL(p(y|x) || p(y))) for one split, straight from the definition.
double brute_force_score(const std::vector<std::vector<double>>& p) {
  const std::size_t m = p.size(), c = p[0].size();
  std::vector<double> marginal(c, 0.0);
  for (const auto& row : p)
    for (std::size_t j = 0; j < c; ++j) marginal[j] += row[j] / m;
  double kl = 0;
  for (const auto& row : p)
    for (std::size_t j = 0; j < c; ++j)
      if (row[j] > 0) kl += row[j] * (std::log(row[j]) - std::log(marginal[j]));
  return std::exp(kl / m);
}

Tensor<double> to_tensor(const std::vector<std::vector<double>>& p) {
  Tensor<double> t(Shape{p.size(), p[0].size()});
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[0].size(); ++j) t[i * p[0].size() + j] = p[i][j];
  return t;
}

std::vector<std::vector<double>> random_probs(std::size_t m, std::size_t c, Rng& rng, double sharpness) {
  std::vector<std::vector<double>> p(m, std::vector<double>(c));
  for (auto& row : p) {
    double s = 0;
    for (auto& v : row) s += (v = std::exp(sharpness * rng.normal<double>({1})[0]));
    for (auto& v : row) v /= s;
  }
  return p;
}

// Two classes: dark or bright 8x8 grey images with mild noise.
void blobs(std::size_t m, Rng& rng, Tensor<float>& images, std::vector<int>& labels) {
  images = Tensor<float>(Shape{m, 1, 8, 8});
  labels.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    labels[i] = static_cast<int>(i % 2);
    const double base = labels[i] ? 0.7 : 0.3;
    for (std::size_t k = 0; k < 64; ++k) images[i * 64 + k] = static_cast<float>(base + rng.uniform(-0.15, 0.15));
  }
}

}  // namespace

TEST_CASE("inception score closed-form cases") {
  std::vector<std::vector<double>> uniform(20, std::vector<double>(5, 0.2));
  CHECK(inception_score_from_probs(to_tensor(uniform)).score == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<std::vector<double>> same(20, std::vector<double>{0, 0, 1, 0});
  CHECK(inception_score_from_probs(to_tensor(same)).score == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<std::vector<double>> cover(10, std::vector<double>(10, 0.0));
  for (std::size_t i = 0; i < 10; ++i) cover[i][i] = 1.0;
  const double brute = brute_force_score(cover);
  CHECK(brute == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(inception_score_from_probs(to_tensor(cover)).score == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("inception score matches brute force on random predictions") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    auto p = random_probs(30, 6, rng, 2.0);
    CHECK(inception_score_from_probs(to_tensor(p)).score == doctest::Approx(brute_force_score(p)).epsilon(1e-10));
  }
}

TEST_CASE("inception score is bounded by 1 and the class count") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t c = 2 + t % 9;
    auto r = inception_score_from_probs(to_tensor(random_probs(40, c, rng, 0.5 + t * 0.2)), 1 + t % 4);
    CHECK(r.score >= 1.0 - 1e-12);
    CHECK(r.score <= double(c) + 1e-12);
    for (double s : r.split_scores) CHECK((s >= 1.0 - 1e-12 && s <= double(c) + 1e-12));
  }
}

TEST_CASE("inception score splits and order") {
  Rng rng(3);
  auto p = random_probs(40, 5, rng, 1.5);
  auto r = inception_score_from_probs(to_tensor(p), 4);
  REQUIRE(r.split_scores.size() == 4);
  CHECK(r.samples == 40);
  double mean = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<std::vector<double>> part(p.begin() + s * 10, p.begin() + (s + 1) * 10);
    CHECK(r.split_scores[s] == doctest::Approx(brute_force_score(part)).epsilon(1e-10));
    mean += r.split_scores[s] / 4;
  }
  CHECK(r.score == doctest::Approx(mean).epsilon(1e-14));

  auto shuffled = p;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(inception_score_from_probs(to_tensor(shuffled)).score == inception_score_from_probs(to_tensor(p)).score);

  CHECK_THROWS_AS(inception_score_from_probs(to_tensor(random_probs(3, 5, rng, 1.0)), 4), UsageError);
  auto text = r.format();
  CHECK(text.find("score: ") != std::string::npos);
  CHECK(text.find("splits: 4") != std::string::npos);
}

TEST_CASE("classifier separates two-class blobs") {
  Rng rng(4);
  Tensor<float> images;
  std::vector<int> labels;
  blobs(600, rng, images, labels);
  ClassifierConfig cfg;
  cfg.widths = {4, 8, 8};
  cfg.epochs = 20;
  cfg.lr = 3e-3;
  cfg.held_out = 0.2;
  ClassifierReport report;
  auto model = train_classifier(images, labels, cfg, &report);
  CHECK(report.held_out_count == 120);
  CHECK(report.train_count == 480);
  CHECK(report.held_out_accuracy > 0.99);
  CHECK(accuracy(model, images, labels) > 0.99);

  auto probs = model.probabilities(images);
  for (std::size_t i = 0; i < 600; ++i) CHECK(probs[i * 2] + probs[i * 2 + 1] == doctest::Approx(1.0).epsilon(1e-12));
  // Confident, evenly spread predictions score close to the class count.
  CHECK(inception_score(images, model).score > 1.8);
}

TEST_CASE("classifier is at chance on shuffled labels") {
  Rng rng(5);
  const std::size_t m = 3000, classes = 4;
  Tensor<float> images(Shape{m, 1, 8, 8});
  for (auto& v : images.data()) v = static_cast<float>(rng.uniform());
  std::vector<int> labels(m);
  for (auto& l : labels) l = static_cast<int>(rng.engine()() % classes);
  ClassifierConfig cfg;
  cfg.widths = {4, 8, 8};
  cfg.epochs = 3;
  cfg.held_out = 0.5;
  ClassifierReport report;
  train_classifier(images, labels, cfg, &report);
  CHECK(std::abs(report.held_out_accuracy - 1.0 / classes) < 0.05);
}

TEST_CASE("classifier training is deterministic and persists") {
  Rng rng(6);
  Tensor<float> images;
  std::vector<int> labels;
  blobs(100, rng, images, labels);
  ClassifierConfig cfg;
  cfg.widths = {2, 3, 4};
  cfg.epochs = 1;
  auto a = train_classifier(images, labels, cfg), b = train_classifier(images, labels, cfg);
  CHECK(a.probabilities(images) == b.probabilities(images));

  Checkpoint ckpt;
  store_classifier(ckpt, a);
  auto loaded = load_classifier(decode_checkpoint(encode_checkpoint(ckpt)));
  CHECK(loaded.classes() == 2);
  CHECK(loaded.widths() == a.widths());
  CHECK(loaded.probabilities(images) == a.probabilities(images));
}

TEST_CASE("classifier rejects bad input") {
  Tensor<float> images(Shape{4, 1, 8, 8});
  ClassifierConfig cfg;
  CHECK_THROWS_AS(train_classifier(images, {1, 1, 1, 1}, cfg), UsageError);
  CHECK_THROWS(train_classifier(images, {0, 1, 0}, cfg));
  Rng rng(0);
  CHECK_THROWS_AS(Classifier(12, 1, 2, {2, 2, 2}, rng), UsageError);
}
