#include <doctest.h>

#include <cmath>

#include "avae/discriminator.hpp"
#include "avae/grad_check.hpp"
#include "avae/ops.hpp"

using namespace avae;
using Vd = Var<double>;

namespace {

const ArchConfig kTiny{8, 3, 4, {3, 4, 5}};

Vd c(Tensor<double> t) { return Vd::constant(std::move(t)); }

Tensor<double> uniform_images(std::size_t b, Rng& rng) {
  Tensor<double> x(Shape{b, 3, 8, 8});
  for (auto& v : x.data()) v = rng.uniform();
  return x;
}

Tensor<double> offset(const Tensor<double>& t, double d) {
  Tensor<double> out = t;
  for (auto& v : out.data()) v += d;
  return out;
}

}  // namespace

TEST_CASE("reconstruction energies hand examples") {
  Rng rng(0);
  auto x = uniform_images(2, rng), xg = uniform_images(2, rng), xv = uniform_images(2, rng);
  auto e = reconstruction_energies(c(x), c(xg), c(xv), c(offset(x, 0.1)), c(offset(xg, -0.2)),
                                   c(xv));
  CHECK(e.real.item() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(e.fake.item() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(e.recon.item() == 0.0);

  Tensor<double> zeros(Shape{1, 3, 8, 8}), ones(Shape{1, 3, 8, 8}, 1.0);
  auto far = reconstruction_energies(c(zeros), c(zeros), c(zeros), c(ones), c(ones), c(ones));
  CHECK(far.real.item() == 1.0);
  CHECK(far.fake.item() == 1.0);
  CHECK(far.recon.item() == 1.0);
}

TEST_CASE("fake energy against the real batch") {
  Tensor<double> x(Shape{1, 3, 8, 8}, 0.25), xg(Shape{1, 3, 8, 8}, 0.75);
  Tensor<double> rxg = xg;
  auto self = reconstruction_energies(c(x), c(xg), c(x), c(x), c(rxg), c(x), FakeEnergy::SelfReconstruction);
  auto real = reconstruction_energies(c(x), c(xg), c(x), c(x), c(rxg), c(x), FakeEnergy::AgainstReal);
  CHECK(self.fake.item() == 0.0);
  CHECK(real.fake.item() == doctest::Approx(0.5));
}

TEST_CASE("energies are non-negative") {
  Rng rng(4);
  Discriminator<double> disc(kTiny, rng);
  for (int i = 0; i < 5; ++i) {
    auto [e, _] = energies(disc, c(uniform_images(2, rng)), c(uniform_images(2, rng)), c(uniform_images(2, rng)));
    CHECK(e.real.item() >= 0.0);
    CHECK(e.fake.item() >= 0.0);
    CHECK(e.recon.item() >= 0.0);
  }
}

TEST_CASE("latent similarity hand examples") {
  auto ones = Tensor<double>::from({1, 2}, {1, 1}), zeros = Tensor<double>(Shape{1, 2});
  CHECK(latent_similarity(c(ones), c(zeros)).item() == 1.0);
  CHECK(latent_similarity(c(ones), c(ones)).item() == 0.0);
  // Batch mean of per-row (1/N)*L1: rows give 1.0 and 0.5.
  auto a = Tensor<double>::from({2, 2}, {1, 1, 0, 1}), b = Tensor<double>(Shape{2, 2});
  CHECK(latent_similarity(c(a), c(b)).item() == doctest::Approx(0.75));
}

TEST_CASE("latent similarity symmetry and scaling") {
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    auto a = rng.normal<double>({3, 5}), b = rng.normal<double>({3, 5});
    const double s = latent_similarity(c(a), c(b)).item();
    CHECK(s >= 0.0);
    CHECK(latent_similarity(c(b), c(a)).item() == doctest::Approx(s).epsilon(1e-14));
    const double k = rng.uniform(-3, 3);
    Tensor<double> ka = a, kb = b;
    for (auto& v : ka.data()) v *= k;
    for (auto& v : kb.data()) v *= k;
    CHECK(latent_similarity(c(ka), c(kb)).item() == doctest::Approx(std::abs(k) * s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(latent_similarity(c(Tensor<double>(Shape{2, 3})), c(Tensor<double>(Shape{2, 4}))), DimensionError);
}

TEST_CASE("discriminator pass shapes") {
  Rng rng(0);
  Discriminator<double> disc(kTiny, rng);
  auto x = c(uniform_images(2, rng));
  auto p = disc.pass(x, x, x);
  CHECK(p.z_d.shape() == Shape{2, 4});
  CHECK(p.x_d.shape() == x.shape());
  CHECK(p.x_g.shape() == x.shape());
  CHECK(p.z_d.value() == p.z_g.value());
  CHECK(p.x_v.value() == p.x_d.value());
  for (double v : p.x_d.value().data()) CHECK((v > 0.0 && v < 1.0));
  CHECK_THROWS_AS(disc.encode(c(Tensor<double>(Shape{1, 1, 8, 8}))), DimensionError);
}

TEST_CASE("energies are invariant to a common permutation of the batch") {
  Rng rng(6);
  Discriminator<double> disc(kTiny, rng);
  auto x = uniform_images(3, rng), xg = uniform_images(3, rng), xv = uniform_images(3, rng);
  auto permute = [](const Tensor<double>& t) {
    const std::size_t per = t.size() / 3;
    Tensor<double> out(t.shape());
    const std::size_t order[3] = {2, 0, 1};
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t i = 0; i < per; ++i) out[b * per + i] = t[order[b] * per + i];
    return out;
  };
  auto [e1, p1] = energies(disc, c(x), c(xg), c(xv));
  auto [e2, p2] = energies(disc, c(permute(x)), c(permute(xg)), c(permute(xv)));
  CHECK(e1.real.item() == doctest::Approx(e2.real.item()).epsilon(1e-13));
  CHECK(e1.fake.item() == doctest::Approx(e2.fake.item()).epsilon(1e-13));
  CHECK(e1.recon.item() == doctest::Approx(e2.recon.item()).epsilon(1e-13));
  // Per-sample outputs are equivariant.
  auto expect = permute(p1.x_d.value());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(p2.x_d.value()[i] == doctest::Approx(expect[i]).epsilon(1e-13));
}

TEST_CASE("energy gradients w.r.t. the discriminator match finite differences") {
  Rng rng(11);
  Discriminator<double> disc(kTiny, rng);
  for (const auto& [_, v] : disc.named_parameters()) {
    Vd p = v;
    for (auto& x : p.mutable_value().data()) x = rng.normal<double>({1}, 0.0, 0.3)[0];
  }
  auto x = c(uniform_images(2, rng)), xg = c(uniform_images(2, rng)), xv = c(uniform_images(2, rng));
  Params<double> phi = values_of(disc.named_parameters());
  auto r = grad_check(
      [&] {
        auto [e, p] = energies(disc, x, xg, xv);
        return e.real - 0.4 * (e.fake + 0.3 * e.recon) + 0.1 * latent_similarity(p.z_d, p.z_v);
      },
      phi, 1e-5);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("discriminator parameter groups") {
  Rng rng(0);
  Discriminator<float> disc(kTiny, rng);
  auto enc = disc.encoder_parameters(), dec = disc.decoder_parameters();
  CHECK(enc.size() + dec.size() == disc.named_parameters().size());
  for (const auto& [n, _] : disc.named_parameters()) CHECK(n.rfind("disc.", 0) == 0);
}
