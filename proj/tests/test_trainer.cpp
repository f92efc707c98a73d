#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "avae/ops.hpp"
#include "avae/training.hpp"

using namespace avae;
namespace fs = std::filesystem;
using Vd = Var<double>;

namespace {

TrainConfig tiny_config() {
  TrainConfig c;
  c.image_size = 8;
  c.channels = 3;
  c.latent_dim = 4;
  c.widths = {3, 4, 5};
  c.batch = 2;
  c.lr = 1e-3;
  c.seed = 7;
  return c;
}

Tensor<float> batch_of(std::size_t b, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> x(Shape{b, 3, 8, 8});
  for (auto& v : x.data()) v = static_cast<float>(rng.uniform());
  return x;
}

Dataset tiny_dataset(std::size_t m) {
  Dataset d;
  d.image_size = 8;
  d.channels = 3;
  d.images = batch_of(m, 99);
  for (std::size_t i = 0; i < m; ++i) d.entries.push_back({std::to_string(i) + ".png", {}, -1});
  return d;
}

std::map<std::string, Tensor<float>> values(const NamedParams<float>& named) {
  std::map<std::string, Tensor<float>> out;
  for (const auto& [n, v] : named) out.emplace(n, v.value());
  return out;
}

std::map<std::string, Tensor<float>> all_values(const Trainer& t) {
  auto out = values(t.generator().named_parameters());
  out.merge(values(t.discriminator().named_parameters()));
  return out;
}

// Names whose values differ between two snapshots.
std::vector<std::string> changed(const std::map<std::string, Tensor<float>>& a,
                                 const std::map<std::string, Tensor<float>>& b) {
  std::vector<std::string> out;
  for (const auto& [n, v] : a)
    if (!(b.at(n) == v)) out.push_back(n);
  return out;
}

bool all_prefixed(const std::vector<std::string>& names, const std::string& prefix) {
  for (const auto& n : names)
    if (n.rfind(prefix, 0) != 0) return false;
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("composite_losses hand example") {
  LossParts p{0.6, 0.3, 1.0, 0.2, 0.1, 0.4};
  auto c = composite_losses(p, 0.5, {0.3, 0.1, 0.1});
  CHECK(std::abs(c.dis - 0.885) < 1e-12);
  CHECK(std::abs(c.gen - 0.33) < 1e-12);
  CHECK(std::abs(c.enc - 0.40) < 1e-12);
  CHECK(composite_losses(p, 0.0, {0.3, 0.1, 0.1}).dis == p.L_d);
  CHECK(composite_losses(p, 0.5, {0.3, 0.0, 0.0}).gen == p.L_g + 0.3 * p.L_v);
}

TEST_CASE("step graph composites agree with composite_losses") {
  Rng rng(1);
  ArchConfig arch{8, 3, 4, {3, 4, 5}};
  Generator<double> gen(arch, rng);
  Discriminator<double> disc(arch, rng);
  Tensor<double> x(Shape{2, 3, 8, 8});
  for (auto& v : x.data()) v = rng.uniform();
  LossWeights w{0.3, 0.2, 0.1};
  auto g = build_step_graph(gen, disc, x, rng.normal<double>({2, 4}), rng.normal<double>({2, 4}), 0.25, w,
                            FakeEnergy::SelfReconstruction);
  auto c = composite_losses(g.parts(), 0.25, w);
  CHECK(g.L_dis.item() == doctest::Approx(c.dis).epsilon(1e-13));
  CHECK(g.L_gen.item() == doctest::Approx(c.gen).epsilon(1e-13));
  CHECK(g.L_enc.item() == doctest::Approx(c.enc).epsilon(1e-13));
}

TEST_CASE("targeted backward isolates each composite") {
  Rng rng(2);
  ArchConfig arch{8, 3, 4, {3, 4, 5}};
  Generator<double> gen(arch, rng);
  Discriminator<double> disc(arch, rng);
  Tensor<double> x(Shape{2, 3, 8, 8});
  for (auto& v : x.data()) v = rng.uniform();
  auto eps = rng.normal<double>({2, 4}), zg = rng.normal<double>({2, 4});
  const LossWeights w{0.3, 0.1, 0.1};
  auto graph = [&] { return build_step_graph(gen, disc, x, eps, zg, 0.4, w, FakeEnergy::SelfReconstruction); };
  auto grads = [](const NamedParams<double>& ps) {
    std::vector<Tensor<double>> out;
    for (const auto& [_, v] : ps) out.push_back(v.grad() ? *v.grad() : Tensor<double>(v.shape()));
    return out;
  };
  auto clear = [&] {
    for (auto& [_, v] : gen.named_parameters()) Vd(v).zero_grad();
    for (auto& [_, v] : disc.named_parameters()) Vd(v).zero_grad();
  };

  SUBCASE("encoder and decoder targets match a full backward") {
    for (int which = 0; which < 2; ++which) {
      auto group = which == 0 ? gen.encoder_parameters() : gen.decoder_parameters();
      auto g1 = graph();
      clear();
      (which == 0 ? g1.L_enc : g1.L_gen).backward(values_of(group));
      auto targeted = grads(group);
      auto g2 = graph();
      clear();
      (which == 0 ? g2.L_enc : g2.L_gen).backward();
      auto full = grads(group);
      REQUIRE(targeted.size() == full.size());
      for (std::size_t i = 0; i < full.size(); ++i) CHECK(targeted[i] == full[i]);
    }
  }

  SUBCASE("discriminator gradient treats generator outputs as constants") {
    auto g1 = graph();
    clear();
    g1.L_dis.backward(values_of(disc.named_parameters()));
    auto targeted = grads(disc.named_parameters());
    for (const auto& [_, v] : gen.named_parameters()) CHECK_FALSE(v.has_grad());

    // Oracle: rebuild L_dis from the same images fed in as plain constants.
    clear();
    auto xg = Vd::constant(g1.x_g.value()), xv = Vd::constant(g1.x_v.value());
    auto [e, _] = energies(disc, Vd::constant(x), xg, xv);
    auto oracle = e.real - 0.4 * (e.fake + 0.3 * e.recon);
    CHECK(oracle.item() == doctest::Approx(g1.L_dis.item()).epsilon(1e-14));
    oracle.backward();
    auto expected = grads(disc.named_parameters());
    for (std::size_t i = 0; i < expected.size(); ++i)
      for (std::size_t j = 0; j < expected[i].size(); ++j)
        CHECK(targeted[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-12));
  }
}

TEST_CASE("each update changes only its own parameter set") {
  Trainer t(tiny_config());
  auto g = t.forward(batch_of(2, 1));
  auto s0 = all_values(t);
  t.update_encoder(g);
  auto s1 = all_values(t);
  auto c1 = changed(s0, s1);
  CHECK_FALSE(c1.empty());
  CHECK(all_prefixed(c1, "vae.enc."));
  CHECK(c1.size() == t.generator().encoder_parameters().size());
  t.update_decoder(g);
  auto s2 = all_values(t);
  auto c2 = changed(s1, s2);
  CHECK(all_prefixed(c2, "vae.dec."));
  CHECK(c2.size() == t.generator().decoder_parameters().size());
  t.step_controller(g.parts());
  t.update_discriminator(g);
  auto c3 = changed(s2, all_values(t));
  CHECK(all_prefixed(c3, "disc."));
  CHECK(c3.size() == t.discriminator().named_parameters().size());
}

TEST_CASE("training steps are deterministic") {
  Trainer a(tiny_config()), b(tiny_config());
  for (std::uint64_t i = 0; i < 3; ++i) {
    auto x = batch_of(2, i);
    CHECK(format_metrics_row(a.step(x)) == format_metrics_row(b.step(x)));
  }
  CHECK(all_values(a) == all_values(b));
  auto cfg = tiny_config();
  cfg.seed = 8;
  Trainer c(cfg);
  CHECK(format_metrics_row(c.step(batch_of(2, 0))) != format_metrics_row(Trainer(tiny_config()).step(batch_of(2, 0))));
}

TEST_CASE("bookkeeping across two steps") {
  Trainer t(tiny_config());
  auto b1 = t.step(batch_of(2, 1));
  CHECK(b1.iteration == 1);
  CHECK(t.encoder_optimizer().steps() == 1);
  CHECK(t.decoder_optimizer().steps() == 1);
  CHECK(t.discriminator_optimizer().steps() == 1);
  ControllerState before = t.controller();
  auto b2 = t.step(batch_of(2, 2));
  CHECK(b2.iteration == 2);
  CHECK(t.iteration() == 2);
  CHECK(t.encoder_optimizer().steps() == 2);
  CHECK(t.discriminator_optimizer().steps() == 2);
  CHECK(b2.e_t == error_signal(b2.L_d, b2.L_g, b2.L_v, before));
  CHECK(t.controller().k == update_k(b2.e_t, before).k);
  CHECK(b2.k_t == t.controller().k);
  CHECK(b2.M == convergence_measure(b2.L_d, b2.L_g, b2.L_v, 0.5, 0.3));
  CHECK(t.running().count == 2);
}

TEST_CASE("logged composites match the parts") {
  Trainer t(tiny_config());
  auto b = t.step(batch_of(2, 3));
  auto c = composite_losses({b.L_e, b.L_n, b.L_d, b.L_g, b.L_v, b.L_s}, 0.0, {0.3, 0.1, 0.1});
  CHECK(b.L_dis == doctest::Approx(c.dis).epsilon(1e-5));
  CHECK(b.L_gen == doctest::Approx(c.gen).epsilon(1e-5));
  CHECK(b.L_enc == doctest::Approx(c.enc).epsilon(1e-5));
  CHECK(b.L_n > 0.0);
}

TEST_CASE("non-finite input aborts with NumericError") {
  Trainer t(tiny_config());
  auto x = batch_of(2, 0);
  x[5] = NAN;
  CHECK_THROWS_AS(t.step(x), NumericError);
}

TEST_CASE("config validation") {
  auto c = tiny_config();
  c.eta = 0.0;
  CHECK_THROWS_AS(Trainer{c}, UsageError);
  c = tiny_config();
  c.batch = 0;
  CHECK_THROWS_AS(Trainer{c}, UsageError);
  c = tiny_config();
  c.image_size = 12;
  CHECK_THROWS_AS(Trainer{c}, UsageError);
}

TEST_CASE("metrics row format") {
  LossBundle b;
  b.iteration = 3;
  b.L_e = 0.1;
  b.k_t = 1.0 / 3.0;
  const std::string row = format_metrics_row(b);
  CHECK(row.rfind("3,0.10000000000000001,0,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 12);
  const std::string header = kMetricsHeader;
  CHECK(std::count(header.begin(), header.end(), ',') == 12);
  CHECK(std::stod(row.substr(row.rfind(',', row.rfind(',') - 1) + 1)) == 1.0 / 3.0);
}

TEST_CASE("run_training writes a log, a config and a checkpoint") {
  TempDir dir("avae_test_run");
  RunConfig cfg;
  cfg.train = tiny_config();
  cfg.train.iterations = 4;
  cfg.train.checkpoint_interval = 2;
  auto data = tiny_dataset(10);
  auto r = run_training(data, cfg, {dir.path});
  CHECK(r.iterations == 4);
  REQUIRE(r.last);
  std::istringstream log(slurp(dir.path / kMetricsFile));
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(log, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == kMetricsHeader);
  CHECK(lines[4] == format_metrics_row(*r.last));
  auto ckpt = load_checkpoint(dir.path / kCheckpointFile);
  CHECK(ckpt.meta("iteration") == "4");
  CHECK(parse_config(slurp(dir.path / kConfigFile)).train.iterations == 4);
}

TEST_CASE("zero iterations yields a loadable initial checkpoint") {
  TempDir dir("avae_test_zero");
  RunConfig cfg;
  cfg.train = tiny_config();
  cfg.train.iterations = 0;
  auto r = run_training(tiny_dataset(6), cfg, {dir.path});
  CHECK(r.iterations == 0);
  CHECK_FALSE(r.last);
  auto ckpt = load_checkpoint(dir.path / kCheckpointFile);
  Trainer fresh(cfg.train);
  Trainer loaded = restore_trainer(ckpt);
  CHECK(all_values(loaded) == all_values(fresh));
}

TEST_CASE("a resumed run reproduces the uninterrupted run") {
  TempDir full("avae_test_full"), split("avae_test_split");
  RunConfig cfg;
  cfg.train = tiny_config();
  cfg.train.iterations = 7;
  cfg.train.checkpoint_interval = 100;
  auto data = tiny_dataset(9);  // 8 train images: epochs roll over mid-run
  run_training(data, cfg, {full.path});

  TrainingOptions first{split.path};
  first.stop_after = 3;
  CHECK(run_training(data, cfg, first).iterations == 3);
  auto ckpt = load_checkpoint(split.path / kCheckpointFile);
  TrainingOptions second{split.path};
  second.resume = &ckpt;
  CHECK(run_training(data, cfg, second).iterations == 7);

  CHECK(slurp(full.path / kMetricsFile) == slurp(split.path / kMetricsFile));
  CHECK(slurp(full.path / kCheckpointFile) == slurp(split.path / kCheckpointFile));
}
