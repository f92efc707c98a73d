#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "avae/tensor.hpp"

namespace avae {

inline constexpr char kCheckpointMagic[4] = {'A', 'V', 'A', 'E'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Self-describing single-file container:
///   "AVAE", u32 version,
///   u32 n_meta,    n_meta x (u32 len, key bytes, u32 len, value bytes),
///   u32 n_tensors, n_tensors x (u32 len, name bytes, u32 rank, rank x u32 dim,
///                               numel x f32)
/// All integers and floats little-endian.
struct Checkpoint {
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;

  bool has_meta(const std::string& key) const { return metadata.count(key) != 0; }
  /// FormatError if missing.
  const std::string& meta(const std::string& key) const;
  bool has_tensor(const std::string& name) const;
  /// FormatError if missing.
  const Tensor<float>& tensor(const std::string& name) const;
  /// Inserts or replaces.
  void put(const std::string& name, Tensor<float> value);
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// FormatError on bad magic, unknown version, truncation or trailing bytes.
Checkpoint decode_checkpoint(const std::string& bytes);

/// Writes to a sibling temporary file then renames over `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Exact text form of a double (hex float) and its inverse.
std::string exact_double(double v);
double parse_double(const std::string& text);
std::uint64_t parse_uint(const std::string& text);

}  // namespace avae
