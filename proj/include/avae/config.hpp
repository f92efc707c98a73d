#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "avae/trainer.hpp"

namespace avae {

/// Everything a command needs: the training configuration plus the data
/// source. Serialized as INI-style text with the sections
/// [model] [loss] [controller] [optim] [train] [data].
struct RunConfig {
  TrainConfig train;
  std::string data;        // image folder
  double held_out = 0.1;   // fraction kept out of training
};

/// Sets one value addressed as "section.key". UsageError for unknown keys or
/// unparsable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// "section.key=value".
void apply_assignment(RunConfig& cfg, const std::string& assignment);

/// Overlays every key of an INI text / file onto `cfg`.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Canonical text of every key; parsing it back over defaults reproduces cfg
/// exactly.
std::string format_config(const RunConfig& cfg);
RunConfig parse_config(const std::string& text);

/// All addressable keys, in output order.
std::vector<std::string> config_keys();

}  // namespace avae
