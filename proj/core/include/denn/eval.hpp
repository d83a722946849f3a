#pragma once

// Multi-label metrics.
//
// Zero-denominator convention: precision is 0 when nothing was predicted,
// recall is 0 when nothing is gold, and F1 is 0 when precision + recall = 0.
// Macro averages run over all C classes, including classes absent from gold.

#include <cstddef>
#include <span>
#include <vector>

#include "denn/math.hpp"

namespace denn {

struct ConfusionCounts {
  std::vector<std::size_t> tp;
  std::vector<std::size_t> fp;
  std::vector<std::size_t> fn;
  std::size_t num_samples = 0;

  std::size_t num_classes() const { return tp.size(); }
};

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Binary decisions: 1 where probability >= threshold.
LabelVector decide(std::span<const double> probabilities, double threshold);

ConfusionCounts confusion(std::span<const LabelVector> gold, std::span<const LabelVector> pred);

PRF prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
PRF micro_prf(const ConfusionCounts& counts);
PRF macro_prf(const ConfusionCounts& counts);

struct GroupScore {
  std::size_t group = 0;
  std::size_t num_labels = 0;
  PRF micro;
  bool empty = false;  // no gold positives and no predictions; F1 reported as 0
};

/// Micro P/R/F1 restricted to each group's labels. `groups[label]` is the
/// label's group index. At least `num_groups` rows are returned, so groups
/// that received no labels still appear.
std::vector<GroupScore> group_report(const ConfusionCounts& counts,
                                     std::span<const std::size_t> groups,
                                     std::size_t num_groups = 0);

/// Fraction of (sample, class) cells predicted wrongly.
double hamming_loss(const ConfusionCounts& counts);

}  // namespace denn
