#include "avae/gradient_suite.hpp"

#include <algorithm>
#include <cstdio>

#include "avae/ops.hpp"
#include "avae/trainer.hpp"

namespace avae {

namespace {

using V = Var<double>;

/// Tensor with entries drawn from N(0, sd^2), shifted away from zero by at
/// least `gap` so kinks at 0 stay far from the probe points.
Tensor<double> away_from_zero(Shape shape, Rng& rng, double sd = 1.0, double gap = 0.05) {
  Tensor<double> t = rng.normal<double>(std::move(shape), 0.0, sd);
  for (auto& v : t.data()) v += v < 0 ? -gap : gap;
  return t;
}

struct Case {
  std::string name;
  Params<double> params;
  std::function<V()> loss;
};

std::vector<Case> operator_cases(Rng& rng) {
  std::vector<Case> cases;
  auto leaf = [&](Shape s, double sd = 1.0) { return V::leaf(away_from_zero(std::move(s), rng, sd)); };
  auto add_case = [&](std::string name, Params<double> params, std::function<V()> f) {
    // Weights are drawn once, here, and captured.
    V probe = f();
    auto w = V::constant(rng.normal<double>(probe.shape()));
    cases.push_back({std::move(name), std::move(params), [f, w] { return sum(mul(f(), w)); }});
  };

  {
    V x = leaf({2, 2, 5, 5}), k = leaf({3, 2, 3, 3}, 0.5);
    add_case("conv2d stride 1 pad 1", {x, k}, [=] { return conv2d(x, k, 1, 1); });
    add_case("conv2d stride 2 pad 0", {x, k}, [=] { return conv2d(x, k, 2, 0); });
  }
  {
    V x = leaf({2, 3, 2, 2}), b = leaf({3});
    add_case("add_bias [B,C,H,W]", {x, b}, [=] { return add_bias(x, b); });
    V y = leaf({2, 3}), c = leaf({3});
    add_case("add_bias [B,F]", {y, c}, [=] { return add_bias(y, c); });
  }
  {
    V x = leaf({3, 4}), w = leaf({2, 4}), b = leaf({2});
    add_case("linear", {x, w, b}, [=] { return linear(x, w, b); });
  }
  {
    V x = leaf({2, 6});
    add_case("elu", {x}, [=] { return elu(x); });
    add_case("sigmoid", {x}, [=] { return sigmoid(x); });
    add_case("exp", {x}, [=] { return avae::exp(x); });
    add_case("exp_excess", {x}, [=] { return exp_excess(x); });
    add_case("clamp", {x}, [=] { return clamp(x, -0.5, 0.5); });
    add_case("reshape", {x}, [=] { return reshape(x, Shape{3, 4}); });
    add_case("scale", {x}, [=] { return scale(x, -1.7); });
    add_case("add_scalar", {x}, [=] { return add_scalar(x, 0.3); });
    add_case("sum", {x}, [=] { return sum(x); });
    add_case("mean", {x}, [=] { return mean(x); });
    add_case("mul (same operand)", {x}, [=] { return mul(x, x); });
  }
  {
    V x = leaf({2, 2, 4, 4});
    add_case("downsample", {x}, [=] { return downsample(x); });
    add_case("upsample", {x}, [=] { return upsample(x); });
  }
  {
    V a = leaf({2, 5}), b = leaf({2, 5});
    add_case("add", {a, b}, [=] { return add(a, b); });
    add_case("sub", {a, b}, [=] { return sub(a, b); });
    add_case("mul", {a, b}, [=] { return mul(a, b); });
    add_case("l1_mean", {a, b}, [=] { return l1_mean(a, b); });
  }
  {
    V logits = leaf({4, 3});
    static const int labels[] = {0, 2, 1, 2};
    add_case("cross_entropy", {logits}, [=] { return cross_entropy(logits, std::span<const int>(labels)); });
  }
  return cases;
}

void rescale(const NamedParams<double>& named, Rng& rng, double sd) {
  for (const auto& [_, v] : named) {
    V p = v;
    p.mutable_value() = away_from_zero(p.shape(), rng, sd, 0.01);
  }
}

}  // namespace

double GradSuiteResult::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.report.max_rel_error);
  return m;
}

std::string GradSuiteResult::format() const {
  std::string out;
  char buf[256];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-28s coords %6zu  max rel err %.3e  at %s (%.6e vs %.6e)\n",
                  e.name.c_str(), e.report.coordinates, e.report.max_rel_error,
                  e.report.worst.c_str(), e.report.worst_analytic, e.report.worst_numeric);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "overall max rel err %.3e\n", max_rel_error());
  return out + buf;
}

GradSuiteResult run_gradient_suite(std::uint64_t seed, double step) {
  GradSuiteResult result;
  Rng rng(derive_seed(seed, 20));
  for (auto& c : operator_cases(rng)) {
    result.entries.push_back({c.name, grad_check(c.loss, c.params, step)});
  }

  const ArchConfig arch{8, 3, 4, {3, 4, 5}};
  Rng init(derive_seed(seed, 21));
  Generator<double> gen(arch, init);
  Discriminator<double> disc(arch, init);
  // The default init is tiny; larger weights give gradients well above the
  // comparison floor.
  rescale(gen.named_parameters(), init, 0.3);
  rescale(disc.named_parameters(), init, 0.3);

  const std::size_t b = 2;
  Tensor<double> x(Shape{b, 3, 8, 8});
  for (auto& v : x.data()) v = init.uniform();
  const Tensor<double> eps = init.normal<double>(Shape{b, 4});
  const Tensor<double> z_g = init.normal<double>(Shape{b, 4});
  const LossWeights w{0.3, 0.1, 0.1};
  const double k = 0.4;

  auto graph = [=] { return build_step_graph(gen, disc, x, eps, z_g, k, w, FakeEnergy::SelfReconstruction); };
  Params<double> all = values_of(gen.named_parameters());
  for (const auto& p : values_of(disc.named_parameters())) all.push_back(p);
  Params<double> disc_params = values_of(disc.named_parameters());

  result.entries.push_back({"L_enc (all parameters)", grad_check([&] { return graph().L_enc; }, all, step)});
  result.entries.push_back({"L_gen (all parameters)", grad_check([&] { return graph().L_gen; }, all, step)});
  result.entries.push_back({"L_dis (discriminator)", grad_check([&] { return graph().L_dis; }, disc_params, step)});
  for (auto& p : all) p.zero_grad();
  return result;
}

}  // namespace avae
