#include "denn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>

#include <json.hpp>

#include "denn/error.hpp"
#include "denn/rng.hpp"

namespace denn {

using nlohmann::json;

std::size_t Sample::num_positive() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

void DatasetConfig::validate() const {
  require(num_classes >= 1, Errc::config_error, "num_classes must be >= 1");
  require(num_clusters >= 1 && num_clusters <= num_classes, Errc::config_error,
          "num_clusters must be in [1, num_classes]");
  require(modes_per_cluster >= 1, Errc::config_error, "modes_per_cluster must be >= 1");
  require(train_samples >= 1 && valid_samples >= 1 && test_samples >= 1, Errc::config_error,
          "every split needs at least one sample");
  require(tokens_per_sample >= 1, Errc::config_error, "tokens_per_sample must be >= 1");
  require(vocab_size >= (num_clusters + 1) * 2 * modes_per_cluster, Errc::config_error,
          "vocab_size too small for the cluster/mode layout");
  require(label_noise >= 0.0 && label_noise <= 1.0, Errc::config_error,
          "label_noise must be in [0, 1]");
  require(topic_fraction >= 0.0 && topic_fraction <= 1.0, Errc::config_error,
          "topic_fraction must be in [0, 1]");
  require(secondary_cluster_prob >= 0.0 && secondary_cluster_prob <= 1.0, Errc::config_error,
          "secondary_cluster_prob must be in [0, 1]");
}

std::pair<std::size_t, std::size_t> cluster_label_range(std::size_t num_classes,
                                                        std::size_t num_clusters,
                                                        std::size_t cluster) {
  return {cluster * num_classes / num_clusters, (cluster + 1) * num_classes / num_clusters};
}

namespace {

struct Mode {
  std::size_t cluster = 0;
  LabelVector labels;
  std::size_t signature_begin = 0;
  std::size_t signature_size = 0;
};

class Generator {
 public:
  explicit Generator(const DatasetConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    block_ = cfg.vocab_size / (cfg.num_clusters + 1);
    const std::size_t signature = block_ / (2 * cfg.modes_per_cluster);
    for (std::size_t c = 0; c < cfg.num_clusters; ++c) {
      const auto [lo, hi] = cluster_label_range(cfg.num_classes, cfg.num_clusters, c);
      for (std::size_t m = 0; m < cfg.modes_per_cluster; ++m) {
        Mode mode;
        mode.cluster = c;
        mode.labels.assign(cfg.num_classes, 0);
        for (std::size_t l = lo; l < hi; ++l) {
          mode.labels[l] = rng_.bernoulli(cfg.label_noise) ? 0 : 1;
        }
        if (std::count(mode.labels.begin() + lo, mode.labels.begin() + hi, 1) == 0) {
          mode.labels[lo + rng_.below(hi - lo)] = 1;
        }
        const std::size_t foreign = cfg.num_classes - (hi - lo);
        if (foreign > 0 && rng_.bernoulli(cfg.label_noise)) {
          std::size_t pick = rng_.below(foreign);
          mode.labels[pick < lo ? pick : pick + (hi - lo)] = 1;
        }
        mode.signature_begin = c * block_ + m * signature;
        mode.signature_size = signature;
        modes_.push_back(std::move(mode));
      }
    }
  }

  Dataset split(std::size_t count) {
    Dataset out;
    out.num_classes = cfg_.num_classes;
    out.vocab_size = cfg_.vocab_size;
    out.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.samples.push_back(sample());
    return out;
  }

 private:
  Sample sample() {
    Sample s;
    s.id = next_id_++;
    const Mode& mode = modes_[rng_.below(modes_.size())];
    s.labels = mode.labels;

    std::size_t secondary = cfg_.num_clusters;
    if (cfg_.num_clusters > 1 && rng_.bernoulli(cfg_.secondary_cluster_prob)) {
      secondary = rng_.below(cfg_.num_clusters - 1);
      if (secondary >= mode.cluster) ++secondary;
      const auto [lo, hi] = cluster_label_range(cfg_.num_classes, cfg_.num_clusters, secondary);
      s.labels[lo + mode.cluster % (hi - lo)] = 1;
    }

    if (rng_.bernoulli(cfg_.label_noise)) {
      if (rng_.bernoulli(0.5) && s.num_positive() > 1) {
        std::vector<std::size_t> positives;
        for (std::size_t l = 0; l < s.labels.size(); ++l) {
          if (s.labels[l] != 0) positives.push_back(l);
        }
        s.labels[positives[rng_.below(positives.size())]] = 0;
      } else {
        s.labels[rng_.below(cfg_.num_classes)] = 1;
      }
    }

    std::map<std::uint32_t, double> counts;
    for (std::size_t t = 0; t < cfg_.tokens_per_sample; ++t) {
      std::size_t token = 0;
      if (rng_.bernoulli(cfg_.topic_fraction)) {
        if (secondary < cfg_.num_clusters && rng_.bernoulli(0.3)) {
          token = secondary * block_ + rng_.below(block_);
        } else if (rng_.bernoulli(0.5)) {
          token = mode.signature_begin + rng_.below(mode.signature_size);
        } else {
          token = mode.cluster * block_ + rng_.below(block_);
        }
      } else {
        token = rng_.below(cfg_.vocab_size);
      }
      counts[static_cast<std::uint32_t>(token)] += 1.0;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.tokens_per_sample));
    s.features.reserve(counts.size());
    for (const auto& [index, count] : counts) s.features.push_back({index, count * scale});
    return s;
  }

  DatasetConfig cfg_;
  Rng rng_;
  std::size_t block_ = 0;
  std::vector<Mode> modes_;
  std::uint64_t next_id_ = 0;
};

json header_json(const Dataset& data) {
  return json{{"format", "denn-dataset"},
              {"version", 1},
              {"num_classes", data.num_classes},
              {"vocab_size", data.vocab_size}};
}

[[noreturn]] void line_error(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  fail(Errc::format_error, path.string() + ":" + std::to_string(line) + ": " + what);
}

Sample parse_sample(const json& j, const Dataset& header, const std::filesystem::path& path,
                    std::size_t line) {
  if (!j.is_object()) line_error(path, line, "record is not a JSON object");
  Sample s;
  if (!j.contains("id") || !j["id"].is_number_unsigned()) {
    line_error(path, line, "missing or non-integer 'id'");
  }
  s.id = j["id"].get<std::uint64_t>();
  if (!j.contains("features") || !j["features"].is_object()) {
    line_error(path, line, "missing 'features' object");
  }
  for (const auto& [key, value] : j["features"].items()) {
    std::uint64_t index = 0;
    try {
      std::size_t consumed = 0;
      index = std::stoull(key, &consumed);
      if (consumed != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      line_error(path, line, "feature key '" + key + "' is not an index");
    }
    if (index >= header.vocab_size) {
      line_error(path, line, "feature index " + key + " >= vocab_size");
    }
    if (!value.is_number()) line_error(path, line, "feature value is not a number");
    s.features.push_back({static_cast<std::uint32_t>(index), value.get<double>()});
  }
  std::sort(s.features.begin(), s.features.end(),
            [](const SparseFeature& a, const SparseFeature& b) { return a.index < b.index; });
  if (!j.contains("labels") || !j["labels"].is_array()) {
    line_error(path, line, "missing 'labels' array");
  }
  s.labels.assign(header.num_classes, 0);
  for (const auto& l : j["labels"]) {
    if (!l.is_number_unsigned()) line_error(path, line, "label is not a non-negative integer");
    const auto label = l.get<std::uint64_t>();
    if (label >= header.num_classes) {
      line_error(path, line,
                 "label index " + std::to_string(label) + " >= num_classes " +
                     std::to_string(header.num_classes));
    }
    s.labels[label] = 1;
  }
  return s;
}

}  // namespace

DatasetSplits generate_synthetic(const DatasetConfig& cfg) {
  cfg.validate();
  Generator gen(cfg);
  DatasetSplits out;
  out.train = gen.split(cfg.train_samples);
  out.valid = gen.split(cfg.valid_samples);
  out.test = gen.split(cfg.test_samples);
  return out;
}

void validate_dataset(const Dataset& data) {
  for (const auto& s : data.samples) {
    if (s.labels.size() != data.num_classes) {
      fail(Errc::dimension_mismatch, "sample " + std::to_string(s.id) + " has " +
                                         std::to_string(s.labels.size()) + " labels, expected " +
                                         std::to_string(data.num_classes));
    }
    for (const auto& f : s.features) {
      if (f.index >= data.vocab_size) {
        fail(Errc::dimension_mismatch,
             "sample " + std::to_string(s.id) + " has feature index out of vocabulary");
      }
    }
  }
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open dataset '" + path.string() + "'");
  std::string text;
  std::size_t line_no = 0;
  Dataset data;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      line_error(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("num_classes") || !j.contains("vocab_size") ||
          !j["num_classes"].is_number_unsigned() || !j["vocab_size"].is_number_unsigned()) {
        line_error(path, line_no, "expected header with num_classes and vocab_size");
      }
      data.num_classes = j["num_classes"].get<std::size_t>();
      data.vocab_size = j["vocab_size"].get<std::size_t>();
      if (data.num_classes == 0) line_error(path, line_no, "num_classes must be positive");
      have_header = true;
      continue;
    }
    data.samples.push_back(parse_sample(j, data, path, line_no));
  }
  if (!have_header) fail(Errc::format_error, path.string() + ": missing header line");
  return data;
}

void save_jsonl(const Dataset& data, const std::filesystem::path& path) {
  validate_dataset(data);
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write dataset '" + path.string() + "'");
  out << header_json(data).dump() << '\n';
  for (const auto& s : data.samples) {
    json features = json::object();
    for (const auto& f : s.features) features[std::to_string(f.index)] = f.value;
    json labels = json::array();
    for (std::size_t l = 0; l < s.labels.size(); ++l) {
      if (s.labels[l] != 0) labels.push_back(l);
    }
    out << json{{"id", s.id}, {"features", features}, {"labels", labels}}.dump() << '\n';
  }
  if (!out) fail(Errc::io_error, "write failed for '" + path.string() + "'");
}

std::vector<std::size_t> label_frequencies(const Dataset& data) {
  std::vector<std::size_t> freq(data.num_classes, 0);
  for (const auto& s : data.samples) {
    for (std::size_t l = 0; l < data.num_classes && l < s.labels.size(); ++l) {
      freq[l] += s.labels[l] != 0 ? 1 : 0;
    }
  }
  return freq;
}

std::vector<std::size_t> frequency_groups(const Dataset& train, std::size_t num_groups) {
  require(num_groups >= 1, Errc::invalid_argument, "frequency_groups: num_groups must be >= 1");
  const auto freq = label_frequencies(train);
  const std::size_t classes = freq.size();
  std::vector<std::size_t> order(classes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
  std::vector<std::size_t> group(classes, 0);
  for (std::size_t rank = 0; rank < classes; ++rank) {
    group[order[rank]] = rank * num_groups / classes;
  }
  return group;
}

std::vector<std::size_t> frequency_groups_by_thresholds(std::span<const std::size_t> frequencies,
                                                        std::span<const double> thresholds) {
  require(std::is_sorted(thresholds.begin(), thresholds.end(), std::greater<>{}),
          Errc::invalid_argument, "frequency thresholds must be in descending order");
  std::vector<std::size_t> group(frequencies.size(), 0);
  for (std::size_t l = 0; l < frequencies.size(); ++l) {
    const auto f = static_cast<double>(frequencies[l]);
    std::size_t g = 0;
    while (g < thresholds.size() && f <= thresholds[g]) ++g;
    group[l] = g;
  }
  return group;
}

}  // namespace denn
