#include "avae/training.hpp"

#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace avae {

namespace {

void put_params(Checkpoint& ckpt, const NamedParams<float>& named) {
  for (const auto& [name, v] : named) ckpt.put(name, v.value());
}

void put_adam(Checkpoint& ckpt, const std::string& group, const Adam<float>& opt,
              const NamedParams<float>& named) {
  const auto& s = opt.state();
  ckpt.metadata["adam." + group + ".step"] = std::to_string(s.step);
  for (std::size_t i = 0; i < named.size(); ++i) {
    ckpt.put("adam." + group + ".m/" + named[i].first, s.first_moment[i]);
    ckpt.put("adam." + group + ".v/" + named[i].first, s.second_moment[i]);
  }
}

void load_params(const Checkpoint& ckpt, const NamedParams<float>& named) {
  for (const auto& [name, v] : named) {
    const auto& t = ckpt.tensor(name);
    require_same_shape(t.shape(), v.shape(), name.c_str());
    Var<float>(v).mutable_value() = t;
  }
}

void load_adam(const Checkpoint& ckpt, const std::string& group, Adam<float>& opt,
               const NamedParams<float>& named) {
  AdamState<float> s = opt.state();
  s.step = parse_uint(ckpt.meta("adam." + group + ".step"));
  for (std::size_t i = 0; i < named.size(); ++i) {
    s.first_moment[i] = ckpt.tensor("adam." + group + ".m/" + named[i].first);
    s.second_moment[i] = ckpt.tensor("adam." + group + ".v/" + named[i].first);
  }
  opt.load_state(std::move(s));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

/// Keeps the header and the rows with iteration <= `upto`.
void truncate_metrics(const fs::path& path, std::size_t upto) {
  std::ifstream in(path);
  if (!in) {
    write_text(path, std::string(kMetricsHeader) + "\n");
    return;
  }
  std::string line, kept;
  std::getline(in, line);
  if (line != kMetricsHeader) throw FormatError(path.string() + ": unexpected metrics header");
  kept = line + "\n";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t it = parse_uint(line.substr(0, line.find(',')));
    if (it > upto) break;
    kept += line + "\n";
  }
  in.close();
  write_text(path, kept);
}

}  // namespace

Checkpoint snapshot(const Trainer& t, const RunConfig& cfg) {
  Checkpoint ckpt;
  auto& m = ckpt.metadata;
  m["config"] = format_config(cfg);
  m["iteration"] = std::to_string(t.iteration());
  m["rng.noise"] = t.noise().save();
  const auto& c = t.controller();
  m["controller.k"] = exact_double(c.k);
  m["controller.e_prev"] = exact_double(c.e_prev);
  m["controller.e_prev2"] = exact_double(c.e_prev2);
  m["controller.eta"] = exact_double(c.eta);
  const auto& r = t.running();
  m["running.fake"] = exact_double(r.fake);
  m["running.recon"] = exact_double(r.recon);
  m["running.real"] = exact_double(r.real);
  m["running.count"] = std::to_string(r.count);

  put_params(ckpt, t.generator().named_parameters());
  put_params(ckpt, t.discriminator().named_parameters());
  put_adam(ckpt, "enc", t.encoder_optimizer(), t.generator().encoder_parameters());
  put_adam(ckpt, "dec", t.decoder_optimizer(), t.generator().decoder_parameters());
  put_adam(ckpt, "disc", t.discriminator_optimizer(), t.discriminator().named_parameters());
  return ckpt;
}

RunConfig checkpoint_config(const Checkpoint& ckpt) { return parse_config(ckpt.meta("config")); }

void restore_into(Trainer& t, const Checkpoint& ckpt) {
  load_params(ckpt, t.generator().named_parameters());
  load_params(ckpt, t.discriminator().named_parameters());
  load_adam(ckpt, "enc", t.encoder_optimizer(), t.generator().encoder_parameters());
  load_adam(ckpt, "dec", t.decoder_optimizer(), t.generator().decoder_parameters());
  load_adam(ckpt, "disc", t.discriminator_optimizer(), t.discriminator().named_parameters());
  t.set_iteration(parse_uint(ckpt.meta("iteration")));
  t.noise().restore(ckpt.meta("rng.noise"));
  auto& c = t.controller();
  c.k = parse_double(ckpt.meta("controller.k"));
  c.e_prev = parse_double(ckpt.meta("controller.e_prev"));
  c.e_prev2 = parse_double(ckpt.meta("controller.e_prev2"));
  c.eta = parse_double(ckpt.meta("controller.eta"));
  t.set_running({parse_double(ckpt.meta("running.fake")),
                 parse_double(ckpt.meta("running.recon")),
                 parse_double(ckpt.meta("running.real")),
                 parse_uint(ckpt.meta("running.count"))});
}

Trainer restore_trainer(const Checkpoint& ckpt, RunConfig* cfg_out,
                        const std::vector<std::string>& overrides) {
  RunConfig cfg = checkpoint_config(ckpt);
  for (const auto& o : overrides) apply_assignment(cfg, o);
  Trainer t(cfg.train);
  restore_into(t, ckpt);
  if (cfg_out) *cfg_out = cfg;
  return t;
}

Generator<float> load_generator(const Checkpoint& ckpt) {
  const RunConfig cfg = checkpoint_config(ckpt);
  Rng rng(0);
  Generator<float> gen(cfg.train.arch(), rng);
  load_params(ckpt, gen.named_parameters());
  return gen;
}

Split training_split(std::size_t count, const RunConfig& cfg) {
  return split_indices(count, cfg.held_out, cfg.train.seed);
}

TrainingResult run_training(const Dataset& data, const RunConfig& cfg,
                            const TrainingOptions& opt) {
  cfg.train.validate();
  if (data.size() == 0) throw UsageError("dataset is empty");
  if (data.image_size != cfg.train.image_size || data.channels != cfg.train.channels) {
    throw UsageError("dataset images are " + std::to_string(data.image_size) + "x" +
                     std::to_string(data.image_size) + "x" + std::to_string(data.channels) +
                     " but the model expects " + std::to_string(cfg.train.image_size) + "x" +
                     std::to_string(cfg.train.image_size) + "x" +
                     std::to_string(cfg.train.channels));
  }
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw FormatError("cannot create " + opt.out_dir.string() + ": " + ec.message());

  const Split split = training_split(data.size(), cfg);
  BatchIterator batches(split.train.size(), cfg.train.batch, derive_seed(cfg.train.seed, 3));
  Trainer trainer(cfg.train);
  const fs::path metrics_path = opt.out_dir / kMetricsFile;
  if (opt.resume) {
    restore_into(trainer, *opt.resume);
    batches.seek(parse_uint(opt.resume->meta("data.epoch")),
                 parse_uint(opt.resume->meta("data.cursor")));
    truncate_metrics(metrics_path, trainer.iteration());
  } else {
    write_text(metrics_path, std::string(kMetricsHeader) + "\n");
  }
  write_text(opt.out_dir / kConfigFile, format_config(cfg));

  TrainingResult result;
  result.checkpoint = opt.out_dir / kCheckpointFile;
  auto save = [&] {
    Checkpoint ckpt = snapshot(trainer, cfg);
    ckpt.metadata["data.epoch"] = std::to_string(batches.epoch());
    ckpt.metadata["data.cursor"] = std::to_string(batches.cursor());
    if (opt.resume) {
      // Carry attribute records over from the state we resumed from.
      for (const auto& [name, t] : opt.resume->tensors)
        if (name.rfind("attr/", 0) == 0) ckpt.put(name, t);
      for (const auto& [k, v] : opt.resume->metadata)
        if (k.rfind("attr.", 0) == 0) ckpt.metadata[k] = v;
    }
    save_checkpoint(result.checkpoint, ckpt);
  };

  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw FormatError("cannot append to " + metrics_path.string());
  std::size_t done_here = 0;
  while (trainer.iteration() < cfg.train.iterations) {
    if (opt.stop_after && done_here >= *opt.stop_after) break;
    const auto idx = batches.next();
    std::vector<std::size_t> rows(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) rows[i] = split.train[idx[i]];
    LossBundle b;
    try {
      b = trainer.step(data.gather(rows));
    } catch (const NumericError&) {
      metrics.flush();
      save();
      throw;
    }
    ++done_here;
    if (b.iteration % cfg.train.metrics_interval == 0) {
      metrics << format_metrics_row(b) << '\n';
      metrics.flush();
      if (!metrics) throw FormatError("failed writing " + metrics_path.string());
    }
    result.last = b;
    if (opt.on_step) opt.on_step(b);
    if (b.iteration % cfg.train.checkpoint_interval == 0) save();
  }
  save();
  result.iterations = trainer.iteration();
  return result;
}

}  // namespace avae
