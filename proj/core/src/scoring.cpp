#include "denn/scoring.hpp"

#include "denn/error.hpp"

namespace denn {

Scores score_predictions(std::span<const PredictionBundle> bundles, const Dataset& gold,
                         double threshold) {
  require(bundles.size() == gold.size(), Errc::dimension_mismatch,
          "score_predictions: prediction count differs from gold count");
  std::vector<LabelVector> g;
  std::vector<LabelVector> p;
  g.reserve(gold.size());
  p.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    g.push_back(gold.samples[i].labels);
    p.push_back(decide(bundles[i].y_final, threshold));
  }
  Scores s;
  s.counts = confusion(g, p);
  s.micro = micro_prf(s.counts);
  s.macro = macro_prf(s.counts);
  s.hamming = hamming_loss(s.counts);
  return s;
}

}  // namespace denn
