#pragma once

#include <span>

#include "denn/dataset.hpp"
#include "denn/eval.hpp"
#include "denn/inference.hpp"

namespace denn {

struct Scores {
  PRF micro;
  PRF macro;
  double hamming = 0.0;
  ConfusionCounts counts;
};

/// Thresholds y_final of each bundle and scores it against `gold`, in order.
Scores score_predictions(std::span<const PredictionBundle> bundles, const Dataset& gold,
                         double threshold);

}  // namespace denn
