#pragma once

#include <filesystem>
#include <functional>
#include <optional>

#include "avae/checkpoint.hpp"
#include "avae/config.hpp"
#include "avae/dataset.hpp"

namespace avae {

/// Full training state: config text, parameters, optimizer moments and
/// counters, controller, noise stream and running loss sums.
Checkpoint snapshot(const Trainer& trainer, const RunConfig& cfg);
/// Rebuilds a trainer from a snapshot. The config is taken from the
/// checkpoint; `overrides` (section.key=value) may change anything that does
/// not alter tensor shapes.
Trainer restore_trainer(const Checkpoint& ckpt, RunConfig* cfg_out = nullptr,
                        const std::vector<std::string>& overrides = {});
/// Copies parameter values and optimizer state from `ckpt` into `trainer`.
void restore_into(Trainer& trainer, const Checkpoint& ckpt);

RunConfig checkpoint_config(const Checkpoint& ckpt);
/// Generator only, for inference commands.
Generator<float> load_generator(const Checkpoint& ckpt);

inline constexpr const char* kMetricsFile = "metrics.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.avae";
inline constexpr const char* kConfigFile = "config.ini";

struct TrainingResult {
  std::size_t iterations = 0;  // total completed, including resumed ones
  std::optional<LossBundle> last;
  std::filesystem::path checkpoint;
};

struct TrainingOptions {
  std::filesystem::path out_dir;
  /// Continue from this state instead of a fresh initialization.
  const Checkpoint* resume = nullptr;
  /// Called after every iteration.
  std::function<void(const LossBundle&)> on_step;
  /// Stop (with a checkpoint) after this many iterations in this call.
  std::optional<std::size_t> stop_after;
};

/// Runs cfg.train.iterations steps over shuffled batches of the training
/// split, writing metrics.csv, config.ini and checkpoint.avae into out_dir.
/// On resume the metrics log is cut back to the checkpoint's iteration and
/// appended. A checkpoint is written every checkpoint_interval steps and at
/// the end; a NumericError aborts after saving the last good state.
TrainingResult run_training(const Dataset& data, const RunConfig& cfg,
                            const TrainingOptions& options);

/// Training / held-out index split used by run_training.
Split training_split(std::size_t count, const RunConfig& cfg);

}  // namespace avae
