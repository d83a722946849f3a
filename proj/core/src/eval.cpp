#include "denn/eval.hpp"

#include <algorithm>

#include "denn/error.hpp"

namespace denn {

LabelVector decide(std::span<const double> probabilities, double threshold) {
  LabelVector out(probabilities.size());
  std::transform(probabilities.begin(), probabilities.end(), out.begin(),
                 [threshold](double p) { return static_cast<std::uint8_t>(p >= threshold); });
  return out;
}

ConfusionCounts confusion(std::span<const LabelVector> gold, std::span<const LabelVector> pred) {
  require(gold.size() == pred.size(), Errc::dimension_mismatch,
          "confusion: gold and prediction counts differ");
  const std::size_t classes = gold.empty() ? 0 : gold.front().size();
  ConfusionCounts c;
  c.tp.assign(classes, 0);
  c.fp.assign(classes, 0);
  c.fn.assign(classes, 0);
  c.num_samples = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    require(gold[i].size() == classes && pred[i].size() == classes, Errc::dimension_mismatch,
            "confusion: label vectors differ in width");
    for (std::size_t k = 0; k < classes; ++k) {
      const bool g = gold[i][k] != 0;
      const bool p = pred[i][k] != 0;
      c.tp[k] += g && p;
      c.fp[k] += !g && p;
      c.fn[k] += g && !p;
    }
  }
  return c;
}

PRF prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF r;
  if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

PRF micro_prf(const ConfusionCounts& counts) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t k = 0; k < counts.num_classes(); ++k) {
    tp += counts.tp[k];
    fp += counts.fp[k];
    fn += counts.fn[k];
  }
  return prf_from_counts(tp, fp, fn);
}

PRF macro_prf(const ConfusionCounts& counts) {
  PRF sum;
  const std::size_t classes = counts.num_classes();
  if (classes == 0) return sum;
  for (std::size_t k = 0; k < classes; ++k) {
    const PRF c = prf_from_counts(counts.tp[k], counts.fp[k], counts.fn[k]);
    sum.precision += c.precision;
    sum.recall += c.recall;
    sum.f1 += c.f1;
  }
  const auto n = static_cast<double>(classes);
  return {sum.precision / n, sum.recall / n, sum.f1 / n};
}

std::vector<GroupScore> group_report(const ConfusionCounts& counts,
                                     std::span<const std::size_t> groups,
                                     std::size_t num_groups) {
  require(groups.size() == counts.num_classes(), Errc::dimension_mismatch,
          "group_report: need one group index per label");
  if (!groups.empty()) {
    num_groups = std::max(num_groups, *std::max_element(groups.begin(), groups.end()) + 1);
  }
  std::vector<std::size_t> tp(num_groups, 0);
  std::vector<std::size_t> fp(num_groups, 0);
  std::vector<std::size_t> fn(num_groups, 0);
  std::vector<std::size_t> members(num_groups, 0);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    tp[groups[k]] += counts.tp[k];
    fp[groups[k]] += counts.fp[k];
    fn[groups[k]] += counts.fn[k];
    ++members[groups[k]];
  }
  std::vector<GroupScore> out;
  for (std::size_t g = 0; g < num_groups; ++g) {
    GroupScore s;
    s.group = g;
    s.num_labels = members[g];
    s.micro = prf_from_counts(tp[g], fp[g], fn[g]);
    s.empty = tp[g] + fp[g] + fn[g] == 0;
    out.push_back(s);
  }
  return out;
}

double hamming_loss(const ConfusionCounts& counts) {
  const std::size_t cells = counts.num_samples * counts.num_classes();
  if (cells == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t k = 0; k < counts.num_classes(); ++k) wrong += counts.fp[k] + counts.fn[k];
  return static_cast<double>(wrong) / static_cast<double>(cells);
}

}  // namespace denn
