#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "denn/math.hpp"

namespace denn {

struct SparseFeature {
  std::uint32_t index = 0;
  double value = 0.0;

  friend bool operator==(const SparseFeature&, const SparseFeature&) = default;
};

/// One example: sparse features sorted by index, plus a binary label vector.
struct Sample {
  std::uint64_t id = 0;
  std::vector<SparseFeature> features;
  LabelVector labels;

  std::size_t num_positive() const;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::size_t num_classes = 0;
  std::size_t vocab_size = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Parameters of the synthetic generator.
///
/// Labels are split into `num_clusters` contiguous blocks. Every cluster has
/// `modes_per_cluster` sub-topics; each sub-topic owns a few signature
/// features and a fixed label pattern derived from the cluster's block. With
/// probability `secondary_cluster_prob` a sample also mixes in a second
/// cluster, which contributes features from that cluster and one label chosen
/// by the (primary, secondary) pair. `label_noise` perturbs the sub-topic
/// label patterns and, per sample, drops or adds a single label.
///
/// With label_noise = 0 and secondary_cluster_prob = 0 every sample's labels
/// equal its cluster's block exactly.
struct DatasetConfig {
  std::size_t num_classes = 12;
  std::size_t num_clusters = 4;
  std::size_t modes_per_cluster = 4;
  std::size_t train_samples = 2000;
  std::size_t valid_samples = 500;
  std::size_t test_samples = 500;
  std::size_t vocab_size = 200;
  std::size_t tokens_per_sample = 20;
  double topic_fraction = 0.4;
  double secondary_cluster_prob = 0.3;
  double label_noise = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DatasetSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

DatasetSplits generate_synthetic(const DatasetConfig& cfg);

/// Label block [first, last) owned by `cluster`.
std::pair<std::size_t, std::size_t> cluster_label_range(std::size_t num_classes,
                                                        std::size_t num_clusters,
                                                        std::size_t cluster);

// Line-delimited JSON. Line 1 is a header
//   {"format":"denn-dataset","version":1,"num_classes":C,"vocab_size":V}
// and every following line is one sample
//   {"id":7,"features":{"3":0.5,"17":1.0},"labels":[0,4]}
Dataset load_jsonl(const std::filesystem::path& path);
void save_jsonl(const Dataset& data, const std::filesystem::path& path);

/// Checks every sample against the dataset's C and vocabulary bounds.
void validate_dataset(const Dataset& data);

std::vector<std::size_t> label_frequencies(const Dataset& data);

/// Label -> group index. Labels are ranked by descending frequency (ties go to
/// the lower label index) and cut into `num_groups` runs of near-equal size.
std::vector<std::size_t> frequency_groups(const Dataset& train, std::size_t num_groups);

/// Label -> group index from explicit descending frequency thresholds: group 0
/// holds f > thresholds[0], group g holds thresholds[g-1] >= f > thresholds[g],
/// and the last group holds f <= thresholds.back().
std::vector<std::size_t> frequency_groups_by_thresholds(std::span<const std::size_t> frequencies,
                                                        std::span<const double> thresholds);

}  // namespace denn
