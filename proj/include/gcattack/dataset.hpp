#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcattack/consistency.hpp"
#include "gcattack/label_graph.hpp"

namespace gcattack {

/// Samples of (feature vector, label state) with a fixed dimension and label count.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::size_t num_labels) : dim_(dim), num_labels_(num_labels) {}

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_labels() const noexcept { return num_labels_; }

  std::span<const double> features(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }
  const LabelState& labels(std::size_t i) const { return labels_[i]; }

  /// Throws ShapeMismatch on a wrong dimension or label count.
  void add(std::span<const double> x, LabelState y);

  std::uint64_t graph_hash = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t num_labels_ = 0;
  std::vector<double> features_;
  std::vector<LabelState> labels_;
};

struct SyntheticDatasetConfig {
  std::size_t samples = 1000;
  std::size_t dim = 32;
  double leaf_probability = 0.12;
  double prototype_scale = 1.0;  // per-coordinate standard deviation of a prototype
  double noise_std = 0.15;
  std::uint64_t seed = 7;    // prototypes
  std::uint64_t stream = 0;  // sample stream; vary for disjoint train/test draws

  void validate() const;  // throws InvalidArgument
};

/// Per sample: each leaf ON with probability pi (redrawn if none is ON), every
/// internal label ON iff one of its children is ON, and
/// x = sum of the ON leaves' prototypes + N(0, noise_std^2) noise.
/// Prototypes depend only on `seed` and the leaf count. Throws NoLeaves.
Dataset generate_synthetic(const LabelGraph& g, const SyntheticDatasetConfig& config);

/// Prototype matrix (one row per leaf, in leaf id order) used by generate_synthetic.
std::vector<std::vector<double>> leaf_prototypes(const LabelGraph& g, const SyntheticDatasetConfig& config);

// Text form: "gcattack-dataset 1" line, header line "n d C graph_hash seed",
// then one line per sample: d features, "|", C signs.
std::string serialize_dataset_text(const Dataset& data);
Dataset parse_dataset_text(std::string_view text);

// Binary form: magic "GCDS", u32 version, u64 n, d, C, graph_hash, seed, then per
// sample d little-endian doubles and C int8 signs.
std::string serialize_dataset_binary(const Dataset& data);
Dataset parse_dataset_binary(std::string_view bytes);

/// Binary when the extension is ".bin", text otherwise.
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

/// Splitmix64 finalizer; derives independent seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace gcattack
