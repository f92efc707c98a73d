#include "avae/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "avae/image_io.hpp"
#include "avae/random.hpp"

namespace fs = std::filesystem;

namespace avae {

namespace {

using Table = std::vector<std::vector<std::string>>;

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Table rows;
  std::string line;
  while (std::getline(in, line)) {
    boost::trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    boost::split(cells, line, boost::is_any_of(","));
    for (auto& c : cells) boost::trim(c);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError(path.string() + ": missing header row");
  return rows;
}

std::map<std::string, std::size_t> index_by_file(const std::vector<DatasetEntry>& entries) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) out[entries[i].file] = i;
  return out;
}

void read_attributes(const fs::path& path, Dataset& ds) {
  Table rows = read_csv(path);
  ds.attribute_names.assign(rows[0].begin() + 1, rows[0].end());
  const auto index = index_by_file(ds.entries);
  std::vector<bool> seen(ds.entries.size(), false);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) {
      throw FormatError(path.string() + ": row " + std::to_string(r) + " has " +
                        std::to_string(row.size()) + " cells, header has " +
                        std::to_string(rows[0].size()));
    }
    auto it = index.find(row[0]);
    if (it == index.end()) throw FormatError(path.string() + ": unknown image " + row[0]);
    auto& flags = ds.entries[it->second].flags;
    flags.clear();
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] == "1" || row[c] == "+1") flags.push_back(true);
      else if (row[c] == "-1") flags.push_back(false);
      else throw FormatError(path.string() + ": flag must be 1 or -1, got '" + row[c] + "'");
    }
    seen[it->second] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw FormatError(path.string() + ": no row for " + ds.entries[i].file);
}

void read_labels(const fs::path& path, Dataset& ds) {
  Table rows = read_csv(path);
  const auto index = index_by_file(ds.entries);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 2) throw FormatError(path.string() + ": expected 'file,label' rows");
    auto it = index.find(row[0]);
    if (it == index.end()) throw FormatError(path.string() + ": unknown image " + row[0]);
    int label = 0;
    try {
      std::size_t used = 0;
      label = std::stoi(row[1], &used);
      if (used != row[1].size() || label < 0) throw std::invalid_argument("label");
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad label '" + row[1] + "'");
    }
    ds.entries[it->second].label = label;
  }
  for (const auto& e : ds.entries)
    if (e.label < 0) throw FormatError(path.string() + ": no label for " + e.file);
}

}  // namespace

bool Dataset::has_labels() const noexcept {
  return !entries.empty() && entries.front().label >= 0;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.label);
  return out;
}

std::size_t Dataset::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  if (it == attribute_names.end()) throw UsageError("unknown attribute '" + name + "'");
  return static_cast<std::size_t>(it - attribute_names.begin());
}

Tensor<float> Dataset::gather(std::span<const std::size_t> indices) const {
  const std::size_t per = channels * image_size * image_size;
  Tensor<float> out(Shape{indices.size(), channels, image_size, image_size});
  auto src = images.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= entries.size()) throw UsageError("dataset index out of range");
    std::copy_n(src.begin() + indices[i] * per, per, dst.begin() + i * per);
  }
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.root = root;
  out.image_size = image_size;
  out.channels = channels;
  out.attribute_names = attribute_names;
  for (std::size_t i : indices) out.entries.push_back(entries.at(i));
  out.images = gather(indices);
  return out;
}

Dataset load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw UsageError("not a directory: " + root.string());
  std::vector<std::string> files;
  for (const auto& de : fs::directory_iterator(root)) {
    if (de.is_regular_file() && boost::iequals(de.path().extension().string(), ".png")) {
      files.push_back(de.path().filename().string());
    }
  }
  if (files.empty()) throw UsageError("no PNG images in " + root.string());
  std::sort(files.begin(), files.end());

  Dataset ds;
  ds.root = root;
  std::vector<float> pixels;
  for (const auto& f : files) {
    Raster r = read_png(root / f);
    if (r.width != r.height) {
      throw FormatError((root / f).string() + ": image is " + std::to_string(r.width) + "x" +
                        std::to_string(r.height) + ", expected square");
    }
    if (ds.entries.empty()) {
      ds.image_size = r.width;
      ds.channels = r.channels;
    } else if (r.width != ds.image_size || r.channels != ds.channels) {
      throw FormatError((root / f).string() + ": size " + std::to_string(r.width) + "x" +
                        std::to_string(r.height) + "x" + std::to_string(r.channels) +
                        " differs from " + std::to_string(ds.image_size) + "x" +
                        std::to_string(ds.image_size) + "x" + std::to_string(ds.channels));
    }
    auto planar = to_planar(r);
    pixels.insert(pixels.end(), planar.data().begin(), planar.data().end());
    ds.entries.push_back({f, {}, -1});
  }
  ds.images = Tensor<float>(Shape{files.size(), ds.channels, ds.image_size, ds.image_size},
                            std::move(pixels));
  if (fs::exists(root / "attributes.csv")) read_attributes(root / "attributes.csv", ds);
  if (fs::exists(root / "labels.csv")) read_labels(root / "labels.csv", ds);
  return ds;
}

Split split_indices(std::size_t count, double held_out_fraction, std::uint64_t seed) {
  if (!(held_out_fraction >= 0.0 && held_out_fraction < 1.0)) {
    throw UsageError("held-out fraction must lie in [0, 1)");
  }
  auto perm = BatchIterator::permutation(count, derive_seed(seed, 0x5eed), 0);
  const auto n_out = static_cast<std::size_t>(std::lround(held_out_fraction * count));
  Split s;
  s.train.assign(perm.begin(), perm.end() - n_out);
  s.held_out.assign(perm.end() - n_out, perm.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.held_out.begin(), s.held_out.end());
  return s;
}

BatchIterator::BatchIterator(std::size_t count, std::size_t batch, std::uint64_t seed)
    : count_(count), batch_(batch), seed_(seed) {
  if (batch == 0) throw UsageError("batch must be >= 1");
  if (count < batch) {
    throw UsageError("dataset has " + std::to_string(count) + " items, fewer than batch " +
                     std::to_string(batch));
  }
  order_ = permutation(count_, seed_, epoch_);
}

std::vector<std::size_t> BatchIterator::permutation(std::size_t count, std::uint64_t seed,
                                                    std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, epoch));
  // Fisher-Yates with explicit draws so the order does not depend on the
  // standard library's shuffle.
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.engine()() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::vector<std::size_t> BatchIterator::next() {
  if ((cursor_ + 1) * batch_ > count_) {
    ++epoch_;
    cursor_ = 0;
    order_ = permutation(count_, seed_, epoch_);
  }
  std::vector<std::size_t> out(order_.begin() + cursor_ * batch_,
                               order_.begin() + (cursor_ + 1) * batch_);
  ++cursor_;
  return out;
}

void BatchIterator::seek(std::size_t epoch, std::size_t cursor) {
  if (cursor * batch_ > count_) throw UsageError("batch cursor beyond end of epoch");
  epoch_ = epoch;
  cursor_ = cursor;
  order_ = permutation(count_, seed_, epoch_);
}

}  // namespace avae
