// Command-line front end: training, sampling, latent-space tools, scoring and
// gradient checks.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "avae/gradient_suite.hpp"
#include "avae/image_io.hpp"
#include "avae/latent.hpp"
#include "avae/ops.hpp"
#include "avae/scoring.hpp"
#include "avae/training.hpp"

namespace fs = std::filesystem;
using namespace avae;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) {
    cmd->add_option("-c,--config", c.config_file, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", c.sets, "Override: section.key=value (repeatable)");
  }
  cmd->add_option("-o,--out", c.out, "Output directory");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir + ": " + ec.message());
  return dir;
}

Checkpoint require_checkpoint(const std::string& path) {
  if (path.empty()) throw UsageError("--checkpoint is required");
  if (!fs::exists(path)) throw UsageError("checkpoint not found: " + path);
  return load_checkpoint(path);
}

/// Checkpoint config, then file, then --set overrides.
RunConfig inference_config(const Checkpoint& ckpt, const Common& c) {
  RunConfig cfg = checkpoint_config(ckpt);
  if (!c.config_file.empty()) apply_config_file(cfg, c.config_file);
  for (const auto& s : c.sets) apply_assignment(cfg, s);
  return cfg;
}

Dataset require_data(const RunConfig& cfg) {
  if (cfg.data.empty()) throw UsageError("no dataset: pass --data or set data.path");
  return load_dataset(cfg.data);
}

Tensor<float> stack_columns(const std::vector<Tensor<float>>& columns) {
  // Interleaves equally sized batches so each row of the grid shows one
  // sample across all columns.
  const std::size_t b = columns.front().dim(0), per = columns.front().size() / b;
  Shape shape = columns.front().shape();
  shape[0] = b * columns.size();
  Tensor<float> out(shape);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t c = 0; c < columns.size(); ++c)
      std::copy_n(columns[c].data().begin() + i * per, per,
                  out.data().begin() + (i * columns.size() + c) * per);
  return out;
}

std::vector<std::size_t> first_n(const std::vector<std::size_t>& pool, std::size_t n) {
  if (pool.size() < n) throw UsageError("dataset split has only " + std::to_string(pool.size()) + " images");
  return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial VAE with an equilibrium controller"};
  app.require_subcommand(1);

  // train
  Common train_c;
  std::string train_data, resume_path;
  std::optional<std::size_t> train_iters;
  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train a model on an image folder");
  add_common(train, train_c);
  train->add_option("-d,--data", train_data, "Image folder (data.path)");
  train->add_option("-n,--iterations", train_iters, "train.iterations");
  train->add_option("-s,--seed", train_seed, "train.seed");
  train->add_option("--resume", resume_path, "Continue from this checkpoint")->check(CLI::ExistingFile);

  // sample
  Common sample_c;
  std::string sample_ckpt;
  std::size_t sample_count = 64, sample_cols = 8;
  std::uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "Decode prior draws into an image grid");
  add_common(sample, sample_c);
  sample->add_option("-k,--checkpoint", sample_ckpt, "Trained checkpoint");
  sample->add_option("--count", sample_count, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--columns", sample_cols, "Grid columns")->check(CLI::PositiveNumber);
  sample->add_option("-s,--seed", sample_seed, "Latent seed");

  // reconstruct
  Common recon_c;
  std::string recon_ckpt, recon_data;
  std::size_t recon_count = 8;
  std::uint64_t recon_seed = 0;
  auto* recon = app.add_subcommand(
      "reconstruct", "Grid of real | VAE reconstruction | discriminator reconstruction | sample | its reconstruction");
  add_common(recon, recon_c);
  recon->add_option("-k,--checkpoint", recon_ckpt, "Trained checkpoint");
  recon->add_option("-d,--data", recon_data, "Image folder (default: data.path of the checkpoint)");
  recon->add_option("--count", recon_count, "Rows")->check(CLI::PositiveNumber);
  recon->add_option("-s,--seed", recon_seed, "Latent seed for the generated column");

  // interpolate
  Common interp_c;
  std::string interp_ckpt, interp_data;
  std::size_t interp_from = 0, interp_to = 1, interp_steps = 8;
  auto* interp = app.add_subcommand("interpolate", "Decode a straight latent path between two images");
  add_common(interp, interp_c);
  interp->add_option("-k,--checkpoint", interp_ckpt, "Trained checkpoint");
  interp->add_option("-d,--data", interp_data, "Image folder");
  interp->add_option("--from", interp_from, "Index of the first image");
  interp->add_option("--to", interp_to, "Index of the second image");
  interp->add_option("--steps", interp_steps, "Points on the path")->check(CLI::Range(2, 1000));

  // attr-build
  Common ab_c;
  std::string ab_ckpt, ab_data, ab_name;
  std::size_t ab_limit = 0;
  auto* attr_build = app.add_subcommand("attr-build", "Store an attribute vector in a checkpoint");
  add_common(attr_build, ab_c);
  attr_build->add_option("-k,--checkpoint", ab_ckpt, "Checkpoint to extend in place");
  attr_build->add_option("-d,--data", ab_data, "Image folder with attributes.csv");
  attr_build->add_option("-a,--attribute", ab_name, "Attribute column")->required();
  attr_build->add_option("--limit", ab_limit, "Use at most this many images per side (0 = all)");

  // attr-apply
  Common aa_c;
  std::string aa_ckpt, aa_data, aa_name;
  std::vector<std::size_t> aa_indices{0, 1, 2, 3};
  std::vector<double> aa_weights{-1.0, 0.0, 1.0};
  auto* attr_apply = app.add_subcommand("attr-apply", "Shift image latents along a stored attribute");
  add_common(attr_apply, aa_c);
  attr_apply->add_option("-k,--checkpoint", aa_ckpt, "Checkpoint holding the attribute");
  attr_apply->add_option("-d,--data", aa_data, "Image folder");
  attr_apply->add_option("-a,--attribute", aa_name, "Attribute name")->required();
  attr_apply->add_option("--index", aa_indices, "Image indices (one grid row each)");
  attr_apply->add_option("--weight", aa_weights, "Weights (one grid column each)");

  // score
  Common score_c;
  std::string score_ckpt, score_data, score_clf;
  std::size_t score_samples = 1000, score_splits = 1, score_epochs = ClassifierConfig{}.epochs;
  std::uint64_t score_seed = 0;
  auto* score = app.add_subcommand("score", "Inception-style score of held-out images and model samples");
  add_common(score, score_c);
  score->add_option("-k,--checkpoint", score_ckpt, "Model to sample from (optional)");
  score->add_option("-d,--data", score_data, "Labeled image folder (labels.csv)");
  score->add_option("--classifier", score_clf, "Saved classifier; trained and saved to the output folder if absent");
  score->add_option("--samples", score_samples, "Generated samples")->check(CLI::PositiveNumber);
  score->add_option("--splits", score_splits, "Splits")->check(CLI::PositiveNumber);
  score->add_option("--epochs", score_epochs, "Classifier epochs")->check(CLI::PositiveNumber);
  score->add_option("-s,--seed", score_seed, "Seed");

  // grad-check
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of all operators and losses");
  grad->add_option("-s,--seed", gc_seed, "Seed");
  grad->add_option("--tolerance", gc_tol, "Maximum relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      RunConfig cfg;
      const Checkpoint* resume = nullptr;
      Checkpoint resume_ckpt;
      if (!resume_path.empty()) {
        resume_ckpt = load_checkpoint(resume_path);
        cfg = checkpoint_config(resume_ckpt);
        resume = &resume_ckpt;
      }
      if (!train_c.config_file.empty()) apply_config_file(cfg, train_c.config_file);
      if (!train_data.empty()) cfg.data = train_data;
      if (train_iters) cfg.train.iterations = *train_iters;
      if (train_seed) cfg.train.seed = *train_seed;
      for (const auto& s : train_c.sets) apply_assignment(cfg, s);
      const Dataset data = require_data(cfg);
      TrainingOptions opt;
      opt.out_dir = prepare_out(train_c.out);
      opt.resume = resume;
      opt.on_step = [&](const LossBundle& b) {
        if (b.iteration % 100 == 0 || b.iteration == cfg.train.iterations) {
          std::printf("iter %zu  L_d %.4f  L_g %.4f  L_e %.4f  k %.4f  M %.4f\n", b.iteration, b.L_d,
                      b.L_g, b.L_e, b.k_t, b.M);
          std::fflush(stdout);
        }
      };
      const auto result = run_training(data, cfg, opt);
      if (result.last) std::printf("final M %.6f\n", result.last->M);
      std::printf("checkpoint %s (%zu iterations)\n", result.checkpoint.c_str(), result.iterations);
    } else if (*sample) {
      const Checkpoint ckpt = require_checkpoint(sample_ckpt);
      const RunConfig cfg = inference_config(ckpt, sample_c);
      const fs::path out = prepare_out(sample_c.out);
      const Generator<float> gen = load_generator(ckpt);
      const auto z = sample_prior<float>(sample_count, cfg.train.latent_dim, sample_seed);
      save_image_grid(gen.decode(Var<float>::constant(z)).value(), sample_cols, out / "samples.png");
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("wrote %s\n", (out / "samples.png").c_str());
    } else if (*recon) {
      const Checkpoint ckpt = require_checkpoint(recon_ckpt);
      RunConfig cfg = inference_config(ckpt, recon_c);
      if (!recon_data.empty()) cfg.data = recon_data;
      const Dataset data = require_data(cfg);
      const fs::path out = prepare_out(recon_c.out);
      Trainer model = restore_trainer(ckpt);
      const Split split = training_split(data.size(), cfg);
      const auto rows = first_n(split.held_out.empty() ? split.train : split.held_out, recon_count);
      auto x = Var<float>::constant(data.gather(rows));
      auto x_v = model.generator().decode(model.generator().encode(x).mu);
      auto x_g = model.generator().decode(
          Var<float>::constant(sample_prior<float>(recon_count, cfg.train.latent_dim, recon_seed)));
      auto pass = model.discriminator().pass(x, x_g, x_v);
      save_image_grid(stack_columns({x.value(), x_v.value(), pass.x_d.value(), x_g.value(),
                                     pass.x_g.value()}),
                      5, out / "reconstruct.png");
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("wrote %s\n", (out / "reconstruct.png").c_str());
    } else if (*interp) {
      const Checkpoint ckpt = require_checkpoint(interp_ckpt);
      RunConfig cfg = inference_config(ckpt, interp_c);
      if (!interp_data.empty()) cfg.data = interp_data;
      const Dataset data = require_data(cfg);
      if (interp_from >= data.size() || interp_to >= data.size()) throw UsageError("image index out of range");
      const fs::path out = prepare_out(interp_c.out);
      const Generator<float> gen = load_generator(ckpt);
      const std::vector<std::size_t> pair{interp_from, interp_to};
      const auto z = encode_means(gen, data.gather(pair));
      save_image_grid(decode_latents(gen, interpolate(z[0], z[1], interp_steps)), interp_steps,
                      out / "interpolate.png");
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("wrote %s\n", (out / "interpolate.png").c_str());
    } else if (*attr_build) {
      Checkpoint ckpt = require_checkpoint(ab_ckpt);
      RunConfig cfg = inference_config(ckpt, ab_c);
      if (!ab_data.empty()) cfg.data = ab_data;
      const Dataset data = require_data(cfg);
      const std::size_t col = data.attribute_index(ab_name);
      std::vector<std::size_t> with, without;
      for (std::size_t i = 0; i < data.size(); ++i) {
        auto& side = data.entries[i].flags[col] ? with : without;
        if (ab_limit == 0 || side.size() < ab_limit) side.push_back(i);
      }
      const Generator<float> gen = load_generator(ckpt);
      const auto attr = build_attribute(encode_means(gen, data.gather(with)),
                                        encode_means(gen, data.gather(without)), ab_name);
      store_attribute(ckpt, attr);
      save_checkpoint(ab_ckpt, ckpt);
      const fs::path out = prepare_out(ab_c.out);
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("attribute %s: %zu with, %zu without, stored in %s\n", ab_name.c_str(),
                  attr.positives, attr.negatives, ab_ckpt.c_str());
    } else if (*attr_apply) {
      const Checkpoint ckpt = require_checkpoint(aa_ckpt);
      RunConfig cfg = inference_config(ckpt, aa_c);
      if (!aa_data.empty()) cfg.data = aa_data;
      const Dataset data = require_data(cfg);
      for (auto i : aa_indices)
        if (i >= data.size()) throw UsageError("image index out of range");
      const fs::path out = prepare_out(aa_c.out);
      const Generator<float> gen = load_generator(ckpt);
      const AttributeVector attr = load_attribute(ckpt, aa_name);
      const auto z = encode_means(gen, data.gather(aa_indices));
      std::vector<Latent> grid;
      for (const auto& zi : z)
        for (double w : aa_weights) grid.push_back(apply_attribute(zi, attr, w));
      save_image_grid(decode_latents(gen, grid), aa_weights.size(), out / "attribute.png");
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("wrote %s\n", (out / "attribute.png").c_str());
    } else if (*score) {
      RunConfig cfg;
      Checkpoint model_ckpt;
      const bool have_model = !score_ckpt.empty();
      if (have_model) {
        model_ckpt = require_checkpoint(score_ckpt);
        cfg = inference_config(model_ckpt, score_c);
      } else {
        if (!score_c.config_file.empty()) apply_config_file(cfg, score_c.config_file);
        for (const auto& s : score_c.sets) apply_assignment(cfg, s);
      }
      if (!score_data.empty()) cfg.data = score_data;
      const Dataset data = require_data(cfg);
      if (!data.has_labels()) throw UsageError(cfg.data + " has no labels.csv");
      const fs::path out = prepare_out(score_c.out);

      ClassifierConfig cc;
      cc.epochs = score_epochs;
      cc.seed = score_seed;
      cc.held_out = cfg.held_out > 0 ? cfg.held_out : 0.1;
      const Split split = split_indices(data.size(), cc.held_out, cc.seed);
      std::string report;
      auto clf = [&] {
        if (!score_clf.empty()) return load_classifier(require_checkpoint(score_clf));
        ClassifierReport r;
        Classifier c = train_classifier(data.images, data.labels(), cc, &r);
        char buf[128];
        std::snprintf(buf, sizeof buf, "classifier_held_out_accuracy: %.6f\n", r.held_out_accuracy);
        report += buf;
        Checkpoint saved;
        store_classifier(saved, c);
        save_checkpoint(out / "classifier.avae", saved);
        return c;
      }();
      const auto real = inception_score(data.gather(split.held_out), clf, score_splits);
      report += "[real_held_out]\n" + real.format();
      if (have_model) {
        const Generator<float> gen = load_generator(model_ckpt);
        Tensor<float> samples(Shape{score_samples, data.channels, data.image_size, data.image_size});
        const std::size_t chunk = 100, per = samples.size() / score_samples;
        for (std::size_t start = 0; start < score_samples; start += chunk) {
          const std::size_t m = std::min(chunk, score_samples - start);
          const auto z = sample_prior<float>(m, cfg.train.latent_dim, derive_seed(score_seed, start));
          const auto x = gen.decode(Var<float>::constant(z)).value();
          std::copy(x.data().begin(), x.data().end(), samples.data().begin() + start * per);
        }
        report += "[generated]\n" + inception_score(samples, clf, score_splits).format();
      }
      std::ofstream(out / "score.txt", std::ios::app) << report;
      write_text(out / kConfigFile, format_config(cfg));
      std::printf("%s", report.c_str());
    } else if (*grad) {
      const auto result = run_gradient_suite(gc_seed);
      std::printf("%s", result.format().c_str());
      const bool ok = result.passed(gc_tol);
      std::printf("%s (tolerance %.1e)\n", ok ? "PASS" : "FAIL", gc_tol);
      return ok ? 0 : 1;
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
