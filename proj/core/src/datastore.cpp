#include "denn/datastore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "binary_io.hpp"
#include "denn/error.hpp"

namespace denn {

namespace detail {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::io_error, "write failed for '" + path + "'");
}

std::uint64_t fnv1a(const unsigned char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

namespace {

constexpr char kMagic[8] = {'D', 'E', 'N', 'N', 'S', 'T', 'O', 'R'};

double promoted_norm(std::span<const float> key) {
  std::vector<double> tmp(key.begin(), key.end());
  return l2_norm(tmp);
}

}  // namespace

Datastore::Datastore(std::size_t dim, std::size_t num_classes, std::vector<float> keys,
                     std::vector<LabelVector> values)
    : dim_(dim), num_classes_(num_classes), keys_(std::move(keys)), values_(std::move(values)) {
  require(dim_ >= 1 && num_classes_ >= 1, Errc::invalid_argument,
          "Datastore: dimensions must be positive");
  require(keys_.size() == values_.size() * dim_, Errc::dimension_mismatch,
          "Datastore: key count differs from value count");
  norms_.reserve(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    require(values_[i].size() == num_classes_, Errc::dimension_mismatch,
            "Datastore: label vector has the wrong width");
    norms_.push_back(promoted_norm(key(i)));
  }
}

Datastore build_datastore(const EncoderState& state, const Dataset& train) {
  return build_datastore(state, train, 1.0);
}

Datastore build_datastore(const EncoderState& state, const Dataset& train, double fraction) {
  require(!train.empty(), Errc::invalid_argument, "build_datastore: empty training set");
  require(fraction > 0.0 && fraction <= 1.0, Errc::invalid_argument,
          "build_datastore: fraction must be in (0, 1]");
  require(train.num_classes == state.config.num_classes &&
              train.vocab_size == state.config.vocab_size,
          Errc::dimension_mismatch, "build_datastore: dataset does not match the model");
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size()))));
  const std::size_t dim = state.config.embed_dim;
  std::vector<float> keys;
  std::vector<LabelVector> values;
  keys.reserve(count * dim);
  values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& s = train.samples[i];
    const auto trace = forward(state, s.features);
    for (double v : trace.embedding) keys.push_back(static_cast<float>(v));
    values.push_back(s.labels);
  }
  return Datastore(dim, state.config.num_classes, std::move(keys), std::move(values));
}

std::vector<Neighbor> retrieve_topk(const Datastore& store, std::span<const double> query,
                                    std::size_t k) {
  require(k >= 1, Errc::invalid_argument, "retrieve_topk: k must be >= 1");
  require(query.size() == store.dim(), Errc::dimension_mismatch,
          "retrieve_topk: query dimension differs from the store");
  const double query_norm = l2_norm(query);
  require(query_norm > 0.0, Errc::invalid_argument, "retrieve_topk: zero-norm query");

  const std::size_t n = store.size();
  std::vector<double> sims(n);
  std::vector<double> promoted(store.dim());
  for (std::size_t i = 0; i < n; ++i) {
    const auto key = store.key(i);
    std::copy(key.begin(), key.end(), promoted.begin());
    const double kn = store.key_norm(i);
    sims[i] = kn > 0.0 ? cosine_from_parts(dot(query, promoted), query_norm, kn) : 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return sims[a] > sims[b] || (sims[a] == sims[b] && a < b);
                    });
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    out.push_back({order[r], sims[order[r]], store.labels(order[r])});
  }
  return out;
}

std::size_t datastore_file_size(std::size_t count, std::size_t dim, std::size_t num_classes) {
  return kDatastoreHeaderBytes + count * (4 * dim + (num_classes + 7) / 8);
}

void save_datastore(const Datastore& store, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kDatastoreVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(store.dim()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(store.num_classes()));
  w.put<std::uint64_t>(store.size());
  w.put_array(store.raw_keys());
  const std::size_t row_bytes = (store.num_classes() + 7) / 8;
  for (std::size_t i = 0; i < store.size(); ++i) {
    std::vector<unsigned char> packed(row_bytes, 0);
    const auto& labels = store.labels(i);
    for (std::size_t c = 0; c < labels.size(); ++c) {
      if (labels[c] != 0) packed[c / 8] |= static_cast<unsigned char>(1u << (c % 8));
    }
    w.put_array(packed);
  }
  detail::write_file(path.string(), w.bytes());
}

Datastore load_datastore(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  const std::string what = "datastore '" + path.string() + "'";
  detail::ByteReader r(bytes, what);
  char magic[8];
  r.take(magic, sizeof(magic));
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    fail(Errc::format_error, what + ": bad magic bytes");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDatastoreVersion) {
    fail(Errc::format_error, what + ": unsupported version " + std::to_string(version));
  }
  const auto dim = r.get<std::uint32_t>();
  const auto classes = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  if (dim == 0 || classes == 0) fail(Errc::format_error, what + ": zero dimension in header");
  const std::size_t row_bytes = (classes + 7) / 8;
  const std::size_t payload_row = 4 * static_cast<std::size_t>(dim) + row_bytes;
  if (count > r.remaining() / payload_row || count * payload_row != r.remaining()) {
    fail(Errc::format_error, what + ": size does not match header (truncated or corrupt)");
  }

  std::vector<float> keys(count * dim);
  r.take(keys.data(), keys.size() * sizeof(float));
  for (float v : keys) {
    if (!std::isfinite(v)) fail(Errc::format_error, what + ": non-finite key");
  }
  std::vector<LabelVector> values(count, LabelVector(classes, 0));
  std::vector<unsigned char> packed(row_bytes);
  for (std::size_t i = 0; i < count; ++i) {
    r.take(packed.data(), row_bytes);
    for (std::size_t c = 0; c < classes; ++c) values[i][c] = (packed[c / 8] >> (c % 8)) & 1u;
    for (std::size_t c = classes; c < row_bytes * 8; ++c) {
      if ((packed[c / 8] >> (c % 8)) & 1u) {
        fail(Errc::format_error, what + ": padding bits set in label row");
      }
    }
  }
  return Datastore(dim, classes, std::move(keys), std::move(values));
}

}  // namespace denn
