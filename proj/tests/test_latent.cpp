#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "avae/latent.hpp"

using namespace avae;

namespace {

Latent L(std::initializer_list<double> v) { return Tensor<double>::from({v.size()}, v); }

// Float-valued random latent, as produced by the encoder.
Latent float_latent(std::size_t n, Rng& rng) {
  Latent z(Shape{n});
  for (auto& v : z.data()) v = static_cast<float>(rng.normal<double>({1})[0] * 3);
  return z;
}

Generator<float> tiny_generator(std::uint64_t seed) {
  Rng rng(seed);
  return Generator<float>({8, 3, 4, {3, 4, 5}}, rng);
}

}  // namespace

TEST_CASE("interpolate hand examples") {
  auto path = interpolate(L({0, 0}), L({2, 4}), 3);
  REQUIRE(path.size() == 3);
  CHECK(path[0] == L({0, 0}));
  CHECK(path[1] == L({1, 2}));
  CHECK(path[2] == L({2, 4}));
  auto same = interpolate(L({0.3, -1}), L({0.3, -1}), 5);
  for (const auto& z : same) CHECK(z == L({0.3, -1}));
}

TEST_CASE("interpolate endpoints are exact and steps are even") {
  Rng rng(3);
  for (std::size_t steps : {2, 3, 7, 10}) {
    auto a = float_latent(6, rng), b = float_latent(6, rng);
    auto path = interpolate(a, b, steps);
    CHECK(path.size() == steps);
    CHECK(path.front() == a);
    CHECK(path.back() == b);
    for (std::size_t i = 1; i + 1 < steps; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        CHECK(path[i + 1][j] - path[i][j] == doctest::Approx((b[j] - a[j]) / double(steps - 1)).epsilon(1e-9));
  }
}

TEST_CASE("interpolate errors") {
  CHECK_THROWS_AS(interpolate(L({0}), L({1}), 1), UsageError);
  CHECK_THROWS_AS(interpolate(L({0, 1}), L({1}), 3), DimensionError);
}

TEST_CASE("build_attribute hand examples") {
  auto a = build_attribute({L({2, 0})}, {L({0, 2})}, "x");
  CHECK(a.vector == Tensor<float>::from({2}, {2, -2}));
  CHECK(a.positives == 1);
  CHECK(a.negatives == 1);
  CHECK(a.name == "x");
  auto b = build_attribute({L({1, 3}), L({3, 5})}, {L({0, 0}), L({0, 2}), L({3, 1})}, "y");
  CHECK(b.vector == Tensor<float>::from({2}, {1, 3}));
  auto same = build_attribute({L({0.1, 0.7}), L({-4, 2})}, {L({0.1, 0.7}), L({-4, 2})}, "z");
  CHECK(same.vector == Tensor<float>(Shape{2}));
}

TEST_CASE("build_attribute is order independent and linear") {
  Rng rng(5);
  std::vector<Latent> with, without;
  for (int i = 0; i < 9; ++i) with.push_back(float_latent(5, rng));
  for (int i = 0; i < 6; ++i) without.push_back(float_latent(5, rng));
  auto base = build_attribute(with, without, "a");
  auto w2 = with, wo2 = without;
  std::reverse(w2.begin(), w2.end());
  std::rotate(wo2.begin(), wo2.begin() + 2, wo2.end());
  CHECK(build_attribute(w2, wo2, "a").vector == base.vector);

  for (auto& z : w2)
    for (auto& v : z.data()) v *= 4;  // powers of two keep the sums exact
  for (auto& z : wo2)
    for (auto& v : z.data()) v *= 4;
  auto scaled = build_attribute(w2, wo2, "a");
  for (std::size_t j = 0; j < 5; ++j) CHECK(scaled.vector[j] == 4 * base.vector[j]);

  for (auto& z : w2)
    for (auto& v : z.data()) v *= -0.3;
  for (auto& z : wo2)
    for (auto& v : z.data()) v *= -0.3;
  auto odd = build_attribute(w2, wo2, "a");
  for (std::size_t j = 0; j < 5; ++j) CHECK(odd.vector[j] == doctest::Approx(-1.2 * base.vector[j]).epsilon(1e-6));
}

TEST_CASE("build_attribute errors") {
  CHECK_THROWS_AS(build_attribute({}, {L({1})}, "a"), UsageError);
  CHECK_THROWS_AS(build_attribute({L({1})}, {}, "a"), UsageError);
  CHECK_THROWS_AS(build_attribute({L({1})}, {L({1, 2})}, "a"), DimensionError);
}

TEST_CASE("apply_attribute") {
  AttributeVector attr{"a", Tensor<float>::from({2}, {2, -2}), 1, 1};
  CHECK(apply_attribute(L({1, 1}), attr, 0.5) == L({2, 0}));
  CHECK(apply_attribute(L({1, 1}), attr, 0.0) == L({1, 1}));
  CHECK_THROWS_AS(apply_attribute(L({1, 1, 1}), attr, 1.0), DimensionError);
}

TEST_CASE("apply_attribute with +w then -w restores z exactly") {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    auto z = float_latent(16, rng);
    AttributeVector attr{"a", Tensor<float>(Shape{16}), 3, 4};
    for (auto& v : attr.vector.data()) v = static_cast<float>(rng.uniform(-2, 2));
    const double w = rng.uniform(-3, 3);
    CHECK(apply_attribute(apply_attribute(z, attr, w), attr, -w) == z);
  }
}

TEST_CASE("decoding interpolation endpoints matches direct decodes") {
  auto gen = tiny_generator(1);
  Rng rng(2);
  Tensor<float> images(Shape{2, 3, 8, 8});
  for (auto& v : images.data()) v = static_cast<float>(rng.uniform());
  auto z = encode_means(gen, images);
  REQUIRE(z.size() == 2);
  CHECK(z[0].shape() == Shape{4});
  auto path = interpolate(z[0], z[1], 6);
  auto along = decode_latents(gen, path);
  auto direct = decode_latents(gen, {z[0], z[1]});
  const std::size_t per = 3 * 8 * 8;
  CHECK(std::equal(along.data().begin(), along.data().begin() + per, direct.data().begin()));
  CHECK(std::equal(along.data().end() - per, along.data().end(), direct.data().begin() + per));
}

TEST_CASE("encode_means is chunk independent") {
  auto gen = tiny_generator(4);
  Rng rng(5);
  Tensor<float> images(Shape{5, 3, 8, 8});
  for (auto& v : images.data()) v = static_cast<float>(rng.uniform());
  auto a = encode_means(gen, images, 64), b = encode_means(gen, images, 2);
  CHECK(a == b);
  auto g = gen.encode(Var<float>::constant(images));
  for (std::size_t j = 0; j < 4; ++j) CHECK(a[3][j] == g.mu.value()[3 * 4 + j]);
}

TEST_CASE("attribute records survive a checkpoint round-trip") {
  Checkpoint ckpt;
  AttributeVector a{"Warm", Tensor<float>::from({3}, {0.25f, -1.5f, 1e-7f}), 12, 30};
  store_attribute(ckpt, a);
  store_attribute(ckpt, {"Large", Tensor<float>::from({3}, {1, 2, 3}), 1, 1});
  auto back = decode_checkpoint(encode_checkpoint(ckpt));
  auto names = stored_attributes(back);
  std::sort(names.begin(), names.end());
  CHECK(names == std::vector<std::string>{"Large", "Warm"});
  auto w = load_attribute(back, "Warm");
  CHECK(w.vector == a.vector);
  CHECK(w.positives == 12);
  CHECK(w.negatives == 30);
  CHECK_THROWS(load_attribute(back, "Missing"));
  CHECK_THROWS_AS(store_attribute(ckpt, {"a/b", Tensor<float>::from({1}, {1}), 1, 1}), UsageError);
}
