#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "denn/dataset.hpp"
#include "denn/encoder.hpp"
#include "denn/math.hpp"

namespace denn {

/// Flat key-value store of training embeddings and their label vectors.
///
/// Keys are held as 32-bit floats (the on-disk precision) and promoted to
/// double for every similarity computation, so a loaded store retrieves
/// exactly like the store it was saved from. Immutable once constructed.
class Datastore {
 public:
  Datastore() = default;
  /// `keys` is row-major, count x dim.
  Datastore(std::size_t dim, std::size_t num_classes, std::vector<float> keys,
            std::vector<LabelVector> values);

  std::size_t size() const { return values_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const float> key(std::size_t i) const { return {keys_.data() + i * dim_, dim_}; }
  const LabelVector& labels(std::size_t i) const { return values_[i]; }
  double key_norm(std::size_t i) const { return norms_[i]; }
  const std::vector<float>& raw_keys() const { return keys_; }

  friend bool operator==(const Datastore& a, const Datastore& b) {
    return a.dim_ == b.dim_ && a.num_classes_ == b.num_classes_ && a.keys_ == b.keys_ &&
           a.values_ == b.values_;
  }

 private:
  std::size_t dim_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<float> keys_;
  std::vector<LabelVector> values_;
  std::vector<double> norms_;
};

struct Neighbor {
  std::size_t index = 0;
  double similarity = 0.0;
  LabelVector labels;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// One entry per training sample, in input order, keyed by the dropout-off
/// embedding.
Datastore build_datastore(const EncoderState& state, const Dataset& train);

/// Store over the first round(fraction * |train|) samples (at least one).
/// Because a store over a prefix is a prefix of the full store, stores of
/// increasing fraction are nested.
Datastore build_datastore(const EncoderState& state, const Dataset& train, double fraction);

/// Exact top-k by cosine similarity: descending similarity, ties by
/// ascending index. Returns min(k, size()) entries.
std::vector<Neighbor> retrieve_topk(const Datastore& store, std::span<const double> query,
                                    std::size_t k);

// Binary layout, little-endian:
//   0   8 bytes  magic "DENNSTOR"
//   8   u32      format version (1)
//   12  u32      d
//   16  u32      C
//   20  u64      count
//   28  count * d float32 keys, row-major
//   ..  count * ceil(C/8) bytes of labels, bit c of entry i at
//       byte c/8, bit c%8 (LSB first)
inline constexpr std::size_t kDatastoreHeaderBytes = 28;
inline constexpr std::uint32_t kDatastoreVersion = 1;

std::size_t datastore_file_size(std::size_t count, std::size_t dim, std::size_t num_classes);

void save_datastore(const Datastore& store, const std::filesystem::path& path);
Datastore load_datastore(const std::filesystem::path& path);

}  // namespace denn
