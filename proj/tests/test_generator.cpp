#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "avae/generator.hpp"
#include "avae/grad_check.hpp"
#include "avae/ops.hpp"

using namespace avae;
using Vd = Var<double>;

namespace {

const ArchConfig kTiny{8, 3, 4, {3, 4, 5}};

// KL(N(mu, s^2) || N(0,1)) by Simpson integration of p log(p/q).
double kl_by_integration(double mu, double s) {
  const double lo = mu - 14 * s, hi = mu + 14 * s;
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto f = [&](double x) {
    const double lp = -0.5 * std::log(2 * M_PI) - std::log(s) - 0.5 * (x - mu) * (x - mu) / (s * s);
    const double lq = -0.5 * std::log(2 * M_PI) - 0.5 * x * x;
    return std::exp(lp) * (lp - lq);
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4 : 2) * f(lo + i * h);
  return acc * h / 3;
}

GaussianParams<double> params_of(Tensor<double> mu, Tensor<double> log_var) {
  return {Vd::constant(std::move(mu)), Vd::constant(std::move(log_var))};
}

void zero(const NamedParams<double>& named, const std::string& prefix) {
  for (const auto& [name, v] : named)
    if (name.rfind(prefix, 0) == 0) Vd(v).mutable_value().fill(0.0);
}

Tensor<double> random_images(std::size_t b, Rng& rng) {
  Tensor<double> x(Shape{b, 3, 8, 8});
  for (auto& v : x.data()) v = rng.uniform();
  return x;
}

}  // namespace

TEST_CASE("kl_loss hand examples") {
  CHECK(kl_loss(params_of(Tensor<double>(Shape{1, 3}), Tensor<double>(Shape{1, 3}))).item() == 0.0);
  CHECK(kl_loss(params_of(Tensor<double>::from({1, 1}, {1.0}), Tensor<double>(Shape{1, 1}))).item() ==
        doctest::Approx(0.5).epsilon(1e-15));
  const double lv = std::log(4.0);
  CHECK(kl_loss(params_of(Tensor<double>(Shape{1, 1}), Tensor<double>::from({1, 1}, {lv}))).item() ==
        doctest::Approx(0.5 * (4 - std::log(4.0) - 1)).epsilon(1e-14));
  CHECK(0.5 * (4 - std::log(4.0) - 1) == doctest::Approx(0.8069).epsilon(1e-4));
}

TEST_CASE("kl_loss sums over dimensions and averages over the batch") {
  // Two rows: (mu=1, s=1) and (mu=0, s=1), two dims each.
  auto g = params_of(Tensor<double>::from({2, 2}, {1, 1, 0, 0}), Tensor<double>(Shape{2, 2}));
  CHECK(kl_loss(g).item() == doctest::Approx((0.5 + 0.5) / 2).epsilon(1e-15));
}

TEST_CASE("kl_loss agrees with numerical integration") {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const double mu = rng.uniform(-2, 2), s = std::exp(rng.uniform(-1, 1));
    auto g = params_of(Tensor<double>::from({1, 1}, {mu}), Tensor<double>::from({1, 1}, {2 * std::log(s)}));
    CHECK(std::abs(kl_loss(g).item() - kl_by_integration(mu, s)) < 1e-6);
  }
}

TEST_CASE("kl_loss is non-negative and zero only at the prior") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    auto g = params_of(rng.normal<double>({2, 4}), rng.normal<double>({2, 4}));
    CHECK(kl_loss(g).item() > 0.0);
  }
}

TEST_CASE("reparametrize") {
  Rng rng(0);
  auto mu = rng.normal<double>({2, 3}), lv = rng.normal<double>({2, 3});
  auto g = params_of(mu, lv);
  CHECK(reparametrize(g, Tensor<double>(Shape{2, 3})).z.value() == mu);
  auto e = rng.normal<double>({2, 3});
  auto unit = params_of(Tensor<double>(Shape{2, 3}), Tensor<double>(Shape{2, 3}));
  CHECK(reparametrize(unit, e).z.value() == e);
  auto s = reparametrize(g, e);
  for (std::size_t i = 0; i < 6; ++i) CHECK(s.z.value()[i] == doctest::Approx(mu[i] + e[i] * std::exp(0.5 * lv[i])).epsilon(1e-15));
  CHECK(s.epsilon == e);
}

TEST_CASE("reparametrize Monte Carlo moments") {
  const std::size_t n = 100000;
  auto g = params_of(Tensor<double>(Shape{n, 1}, 1.0), Tensor<double>(Shape{n, 1}, std::log(4.0)));
  Rng rng(42);
  auto z = reparametrize(g, rng).z.value();
  double m = 0, v = 0;
  for (double x : z.data()) m += x;
  m /= n;
  for (double x : z.data()) v += (x - m) * (x - m);
  CHECK(std::abs(m - 1.0) < 0.02);
  CHECK(std::abs(std::sqrt(v / (n - 1)) - 2.0) < 0.02);
}

TEST_CASE("reparametrize gradients reach mu and log_var but not epsilon") {
  Rng rng(1);
  Vd mu = Vd::leaf(rng.normal<double>({2, 2})), lv = Vd::leaf(rng.normal<double>({2, 2}));
  Params<double> ps{mu, lv};
  auto e = rng.normal<double>({2, 2});
  auto r = grad_check(
      [&] {
        auto z = reparametrize<double>({mu, lv}, e).z;
        return sum(mul(z, z));
      },
      ps);
  CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("sample_prior") {
  CHECK(sample_prior<float>(3, 4, 7) == sample_prior<float>(3, 4, 7));
  CHECK_FALSE(sample_prior<float>(3, 4, 7) == sample_prior<float>(3, 4, 8));
  CHECK_THROWS_AS(sample_prior<float>(0, 4, 1), UsageError);
  auto z = sample_prior<double>(100000, 2, 5);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 100000; ++i) m += z[i * 2 + c];
    m /= 100000;
    for (std::size_t i = 0; i < 100000; ++i) v += (z[i * 2 + c] - m) * (z[i * 2 + c] - m);
    CHECK(std::abs(m) < 0.02);
    CHECK(std::abs(v / 99999 - 1.0) < 0.02);
  }
}

TEST_CASE("data_loss") {
  Tensor<double> ones(Shape{2, 3, 2, 2}, 1.0), zeros(Shape{2, 3, 2, 2}, 0.0);
  CHECK(data_loss(Vd::constant(ones), Vd::constant(ones)).item() == 0.0);
  CHECK(data_loss(Vd::constant(ones), Vd::constant(zeros)).item() == 1.0);
  Rng rng(2);
  auto a = rng.normal<double>({12}), b = rng.normal<double>({12});
  Tensor<double> pa(a.shape()), pb(b.shape());
  for (std::size_t i = 0; i < 12; ++i) {
    pa[i] = a[(i * 5) % 12];
    pb[i] = b[(i * 5) % 12];
  }
  CHECK(data_loss(Vd::constant(a), Vd::constant(b)).item() ==
        doctest::Approx(data_loss(Vd::constant(pa), Vd::constant(pb)).item()).epsilon(1e-15));
}

TEST_CASE("encoder and decoder shapes and determinism") {
  Rng rng(0);
  Generator<double> gen(kTiny, rng);
  auto x = Vd::constant(random_images(2, rng));
  auto g1 = gen.encode(x), g2 = gen.encode(x);
  CHECK(g1.mu.shape() == Shape{2, 4});
  CHECK(g1.mu.value() == g2.mu.value());
  CHECK(g1.log_var.value() == g2.log_var.value());
  bool rows_differ = false;
  for (std::size_t j = 0; j < 4; ++j) rows_differ |= g1.mu.value()[j] != g1.mu.value()[4 + j];
  CHECK(rows_differ);
  auto z = reparametrize(g1, rng);
  auto xr = gen.decode(z.z);
  CHECK(xr.shape() == x.shape());
  CHECK(gen.decode(z.z).value() == xr.value());
  for (double v : xr.value().data()) CHECK((v > 0.0 && v < 1.0));
  CHECK_THROWS_AS(gen.encode(Vd::constant(Tensor<double>(Shape{1, 3, 16, 16}))), DimensionError);
  CHECK_THROWS_AS(gen.decode(Vd::constant(Tensor<double>(Shape{1, 5}))), DimensionError);
}

TEST_CASE("round-trip shape at every configured size") {
  for (std::size_t s : {8, 16, 32}) {
    Rng rng(1);
    Generator<float> gen({s, 1, 3, {2, 2, 2}}, rng);
    Var<float> x = Var<float>::constant(Tensor<float>(Shape{2, 1, s, s}, 0.5f));
    CHECK(gen.decode(reparametrize(gen.encode(x), rng).z).shape() == x.shape());
  }
  Rng rng(0);
  CHECK_THROWS_AS(Generator<float>({12, 3, 4, {2, 2, 2}}, rng), UsageError);
  CHECK_THROWS_AS(Generator<float>({4, 3, 4, {2, 2, 2}}, rng), UsageError);
}

TEST_CASE("zeroed heads give the prior and a flat grey image") {
  Rng rng(0);
  Generator<double> gen(kTiny, rng);
  zero(gen.encoder_parameters(), "vae.enc.mu");
  zero(gen.encoder_parameters(), "vae.enc.logvar");
  auto g = gen.encode(Vd::constant(random_images(3, rng)));
  for (double v : g.mu.value().data()) CHECK(v == 0.0);
  for (double v : g.log_var.value().data()) CHECK(v == 0.0);
  zero(gen.decoder_parameters(), "vae.dec.out.");
  auto flat = gen.decode(Vd::constant(rng.normal<double>({2, 4})));
  for (double v : flat.value().data()) CHECK(v == 0.5);
}

TEST_CASE("log-variance is clamped") {
  Rng rng(0);
  Generator<double> gen(kTiny, rng);
  for (const auto& [name, v] : gen.encoder_parameters())
    if (name.rfind("vae.enc.logvar", 0) == 0 && name.find("bias") != std::string::npos) Vd(v).mutable_value().fill(50.0);
  auto g = gen.encode(Vd::constant(random_images(1, rng)));
  for (double v : g.log_var.value().data()) CHECK(v == kLogVarMax);
}

TEST_CASE("decoder gradient w.r.t. z matches finite differences") {
  Rng rng(8);
  Generator<double> gen(kTiny, rng);
  for (const auto& [_, v] : gen.decoder_parameters()) {
    Vd p = v;
    for (auto& x : p.mutable_value().data()) x = rng.normal<double>({1}, 0.0, 0.3)[0];
  }
  Vd z = Vd::leaf(rng.normal<double>({2, 4}));
  auto target = Vd::constant(random_images(2, rng));
  Params<double> ps{z};
  auto r = grad_check([&] { return l1_mean(gen.decode(z), target); }, ps, 1e-5);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("L_e + L_n gradient w.r.t. the encoder matches finite differences") {
  Rng rng(9);
  Generator<double> gen(kTiny, rng);
  for (const auto& [_, v] : gen.named_parameters()) {
    Vd p = v;
    for (auto& x : p.mutable_value().data()) x = rng.normal<double>({1}, 0.0, 0.3)[0];
  }
  auto x = Vd::constant(random_images(2, rng));
  auto eps = rng.normal<double>({2, 4});
  Params<double> theta_e = values_of(gen.encoder_parameters());
  auto r = grad_check(
      [&] {
        auto g = gen.encode(x);
        return data_loss(x, gen.decode(reparametrize(g, eps).z)) + kl_loss(g);
      },
      theta_e, 1e-5);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("parameter groups are disjoint and named") {
  Rng rng(0);
  Generator<float> gen(kTiny, rng);
  auto enc = gen.encoder_parameters(), dec = gen.decoder_parameters();
  CHECK(enc.size() + dec.size() == gen.named_parameters().size());
  for (const auto& [n, _] : enc) CHECK(n.rfind("vae.enc.", 0) == 0);
  for (const auto& [n, _] : dec) CHECK(n.rfind("vae.dec.", 0) == 0);
}

TEST_CASE("a sample's decode does not depend on the rest of the batch") {
  Rng rng(12);
  Generator<float> gen({16, 3, 8, {4, 6, 8}}, rng);
  auto z = rng.normal<float>({7, 8});
  auto all = gen.decode(Var<float>::constant(z));
  const std::size_t per = 3 * 16 * 16;
  for (std::size_t b = 0; b < 7; ++b) {
    Tensor<float> one(Shape{1, 8});
    for (std::size_t j = 0; j < 8; ++j) one[j] = z[b * 8 + j];
    auto single = gen.decode(Var<float>::constant(one));
    CHECK(std::equal(single.value().data().begin(), single.value().data().end(),
                     all.value().data().begin() + b * per));
  }
}
