#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "denn/dataset.hpp"
#include "denn/error.hpp"
#include "support/temp_dir.hpp"

using namespace denn;
using testing_support::TempDir;

namespace {

DatasetConfig small_config() {
  DatasetConfig cfg;
  cfg.train_samples = 300;
  cfg.valid_samples = 50;
  cfg.test_samples = 50;
  return cfg;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

Errc load_error_code(const std::filesystem::path& p, std::string* message = nullptr) {
  try {
    load_jsonl(p);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected load_jsonl to fail";
  return Errc::invalid_argument;
}

}  // namespace

TEST(GenerateSynthetic, SameSeedIsBitIdentical) {
  const auto a = generate_synthetic(small_config());
  const auto b = generate_synthetic(small_config());
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.valid, b.valid);
  EXPECT_EQ(a.test, b.test);
  auto other = small_config();
  other.seed = 2;
  EXPECT_NE(generate_synthetic(other).train, a.train);
}

TEST(GenerateSynthetic, SplitSizesAndDisjointIds) {
  const auto s = generate_synthetic(small_config());
  EXPECT_EQ(s.train.size(), 300u);
  EXPECT_EQ(s.valid.size(), 50u);
  EXPECT_EQ(s.test.size(), 50u);
  std::set<std::uint64_t> ids;
  for (const auto* d : {&s.train, &s.valid, &s.test}) {
    for (const auto& x : d->samples) ids.insert(x.id);
  }
  EXPECT_EQ(ids.size(), 400u);
}

TEST(GenerateSynthetic, SamplesAreWellFormed) {
  const auto s = generate_synthetic(small_config());
  for (const auto* d : {&s.train, &s.valid, &s.test}) {
    EXPECT_EQ(d->num_classes, 12u);
    EXPECT_EQ(d->vocab_size, 200u);
    EXPECT_NO_THROW(validate_dataset(*d));
    for (const auto& x : d->samples) {
      EXPECT_GE(x.num_positive(), 1u);
      EXPECT_FALSE(x.features.empty());
      for (std::size_t i = 1; i < x.features.size(); ++i) {
        EXPECT_LT(x.features[i - 1].index, x.features[i].index);
      }
    }
  }
}

TEST(GenerateSynthetic, NoiselessSamplesCarryExactlyTheirClusterLabels) {
  auto cfg = small_config();
  cfg.label_noise = 0.0;
  cfg.secondary_cluster_prob = 0.0;
  const auto s = generate_synthetic(cfg);
  std::vector<LabelVector> blocks;
  for (std::size_t c = 0; c < cfg.num_clusters; ++c) {
    const auto [lo, hi] = cluster_label_range(cfg.num_classes, cfg.num_clusters, c);
    LabelVector v(cfg.num_classes, 0);
    for (auto l = lo; l < hi; ++l) v[l] = 1;
    blocks.push_back(v);
  }
  std::set<std::size_t> seen;
  for (const auto& x : s.train.samples) {
    std::size_t match = blocks.size();
    for (std::size_t c = 0; c < blocks.size(); ++c) {
      if (x.labels == blocks[c]) match = c;
    }
    ASSERT_LT(match, blocks.size()) << "sample " << x.id << " does not carry a cluster block";
    seen.insert(match);
  }
  EXPECT_EQ(seen.size(), cfg.num_clusters);
}

TEST(GenerateSynthetic, DefaultConfigMeanLabelCount) {
  const auto s = generate_synthetic(DatasetConfig{});
  ASSERT_EQ(s.train.size(), 2000u);
  std::size_t positives = 0;
  for (const auto& x : s.train.samples) {
    for (auto v : x.labels) positives += v;
  }
  const double mean = static_cast<double>(positives) / 2000.0;
  EXPECT_GE(mean, 2.0);
  EXPECT_LE(mean, 4.0);
}

TEST(GenerateSynthetic, InvalidConfigRejected) {
  auto cfg = small_config();
  cfg.num_clusters = 13;
  EXPECT_THROW(generate_synthetic(cfg), Error);
  cfg = small_config();
  cfg.train_samples = 0;
  EXPECT_THROW(generate_synthetic(cfg), Error);
  cfg = small_config();
  cfg.label_noise = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), Error);
}

TEST(ClusterLabelRange, BlocksPartitionLabels) {
  std::vector<int> covered(13, 0);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto [lo, hi] = cluster_label_range(13, 4, c);
    EXPECT_LT(lo, hi);
    for (auto l = lo; l < hi; ++l) ++covered[l];
  }
  for (int v : covered) EXPECT_EQ(v, 1);
}

TEST(Jsonl, RoundTripIsExact) {
  TempDir dir;
  const auto s = generate_synthetic(small_config());
  save_jsonl(s.train, dir / "train.jsonl");
  EXPECT_EQ(load_jsonl(dir / "train.jsonl"), s.train);
}

TEST(Jsonl, SaveOfLoadIsByteIdentical) {
  TempDir dir;
  save_jsonl(generate_synthetic(small_config()).test, dir / "a.jsonl");
  save_jsonl(load_jsonl(dir / "a.jsonl"), dir / "b.jsonl");
  std::ifstream a(dir / "a.jsonl"), b(dir / "b.jsonl");
  const std::string ta((std::istreambuf_iterator<char>(a)), {});
  const std::string tb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(ta, tb);
}

TEST(Jsonl, WorkedExampleParses) {
  TempDir dir;
  write_text(dir / "d.jsonl",
             "{\"format\":\"denn-dataset\",\"version\":1,\"num_classes\":5,\"vocab_size\":20}\n"
             "{\"id\":7,\"features\":{\"17\":1.0,\"3\":0.5},\"labels\":[0,4]}\n");
  const auto d = load_jsonl(dir / "d.jsonl");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.num_classes, 5u);
  EXPECT_EQ(d.samples[0].id, 7u);
  ASSERT_EQ(d.samples[0].features.size(), 2u);
  EXPECT_EQ(d.samples[0].features[0], (SparseFeature{3, 0.5}));
  EXPECT_EQ(d.samples[0].features[1], (SparseFeature{17, 1.0}));
  EXPECT_EQ(d.samples[0].labels, (LabelVector{1, 0, 0, 0, 1}));
}

TEST(Jsonl, HeaderOnlyGivesEmptyDataset) {
  TempDir dir;
  write_text(dir / "e.jsonl", "{\"num_classes\":3,\"vocab_size\":4}\n");
  const auto d = load_jsonl(dir / "e.jsonl");
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.num_classes, 3u);
}

TEST(Jsonl, LabelOutOfRangeNamesLine) {
  TempDir dir;
  write_text(dir / "bad.jsonl",
             "{\"num_classes\":3,\"vocab_size\":4}\n"
             "{\"id\":0,\"features\":{\"1\":1.0},\"labels\":[0]}\n"
             "{\"id\":1,\"features\":{\"1\":1.0},\"labels\":[3]}\n");
  std::string msg;
  EXPECT_EQ(load_error_code(dir / "bad.jsonl", &msg), Errc::format_error);
  EXPECT_NE(msg.find("bad.jsonl:3"), std::string::npos) << msg;
}

TEST(Jsonl, MalformedInputsAreFormatErrors) {
  TempDir dir;
  const std::string header = "{\"num_classes\":3,\"vocab_size\":4}\n";
  const std::vector<std::string> bodies = {
      "{not json\n",
      "{\"id\":0,\"features\":{\"9\":1.0},\"labels\":[0]}\n",
      "{\"id\":0,\"features\":{\"x\":1.0},\"labels\":[0]}\n",
      "{\"id\":0,\"labels\":[0]}\n",
      "{\"id\":0,\"features\":{}}\n",
      "{\"id\":-1,\"features\":{},\"labels\":[0]}\n",
      "[1,2]\n",
  };
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const auto p = dir / ("m" + std::to_string(i) + ".jsonl");
    write_text(p, header + bodies[i]);
    std::string msg;
    EXPECT_EQ(load_error_code(p, &msg), Errc::format_error) << bodies[i];
    EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
  }
  write_text(dir / "nohead.jsonl", "");
  EXPECT_EQ(load_error_code(dir / "nohead.jsonl"), Errc::format_error);
  EXPECT_EQ(load_error_code(dir / "absent.jsonl"), Errc::io_error);
}

TEST(FrequencyGroups, SingleGroup) {
  const auto s = generate_synthetic(small_config());
  for (auto g : frequency_groups(s.train, 1)) EXPECT_EQ(g, 0u);
}

TEST(FrequencyGroups, PartitionByDescendingFrequencyWithIndexTieBreak) {
  Dataset d;
  d.num_classes = 4;
  d.vocab_size = 1;
  // Frequencies: label 0 -> 1, label 1 -> 3, label 2 -> 3, label 3 -> 2.
  for (LabelVector y : {LabelVector{1, 1, 1, 1}, LabelVector{0, 1, 1, 1}, LabelVector{0, 1, 1, 0}}) {
    d.samples.push_back({0, {{0, 1.0}}, y});
  }
  EXPECT_EQ(frequency_groups(d, 4), (std::vector<std::size_t>{3, 0, 1, 2}));
  EXPECT_EQ(frequency_groups(d, 2), (std::vector<std::size_t>{1, 0, 0, 1}));
}

TEST(FrequencyGroups, EveryLabelInExactlyOneGroupOfNearEqualSize) {
  const auto s = generate_synthetic(small_config());
  for (std::size_t g = 1; g <= 12; ++g) {
    const auto groups = frequency_groups(s.train, g);
    ASSERT_EQ(groups.size(), 12u);
    std::vector<std::size_t> sizes(g, 0);
    for (auto x : groups) {
      ASSERT_LT(x, g);
      ++sizes[x];
    }
    const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
    EXPECT_LE(*mx - *mn, 1u);
  }
  EXPECT_THROW(frequency_groups(s.train, 0), Error);
}

TEST(FrequencyGroups, AapdThresholds) {
  const std::vector<double> thresholds{4500, 1700, 870};
  const std::vector<std::size_t> freqs{9000, 4501, 4500, 1701, 1700, 871, 870, 10};
  EXPECT_EQ(frequency_groups_by_thresholds(freqs, thresholds),
            (std::vector<std::size_t>{0, 0, 1, 1, 2, 2, 3, 3}));
  const std::vector<double> ascending{870, 1700};
  EXPECT_THROW(frequency_groups_by_thresholds(freqs, ascending), Error);
}
