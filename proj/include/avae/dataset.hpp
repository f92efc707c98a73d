#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "avae/tensor.hpp"

namespace avae {

struct DatasetEntry {
  std::string file;
  std::vector<bool> flags;  // one per Dataset::attribute_names, empty without a table
  int label = -1;           // -1 without labels.csv
};

/// A folder of equal-sized PNGs held in memory as [M,C,S,S] floats in [0,1].
///
/// Optional side tables in the same folder:
///   attributes.csv  header "file,<name>,<name>,...", rows of +1 / -1 flags
///   labels.csv      header "file,label", integer class per row
struct Dataset {
  std::filesystem::path root;
  std::size_t image_size = 0;
  std::size_t channels = 0;
  std::vector<std::string> attribute_names;
  std::vector<DatasetEntry> entries;  // sorted by file name
  Tensor<float> images;

  std::size_t size() const noexcept { return entries.size(); }
  bool has_labels() const noexcept;
  std::vector<int> labels() const;
  /// Index of an attribute column; UsageError if unknown.
  std::size_t attribute_index(const std::string& name) const;

  /// [n,C,S,S] copy of the chosen images.
  Tensor<float> gather(std::span<const std::size_t> indices) const;
  /// New dataset holding only the chosen entries, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Loads every *.png under `root` (non-recursive). Images must be square,
/// equal-sized and all grey or all RGB. Errors name the offending file.
Dataset load_dataset(const std::filesystem::path& root);

/// Deterministic split: a seeded permutation, with the last
/// round(fraction * size) indices held out. Both parts are sorted.
struct Split {
  std::vector<std::size_t> train, held_out;
};
Split split_indices(std::size_t count, double held_out_fraction, std::uint64_t seed);

/// Epoch-shuffled mini-batches over `count` items. The permutation of epoch
/// e depends only on (seed, e); a trailing partial batch is dropped.
class BatchIterator {
 public:
  BatchIterator(std::size_t count, std::size_t batch, std::uint64_t seed);

  std::vector<std::size_t> next();

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t cursor() const noexcept { return cursor_; }
  /// Resumes at batch position `cursor` of `epoch`.
  void seek(std::size_t epoch, std::size_t cursor);

  static std::vector<std::size_t> permutation(std::size_t count, std::uint64_t seed,
                                              std::size_t epoch);

 private:
  std::size_t count_, batch_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0, cursor_ = 0;
  std::vector<std::size_t> order_;
};

}  // namespace avae
