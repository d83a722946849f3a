#pragma once

// kNN-augmented prediction with a per-sample mixing weight.
//
//   y_clf    classifier probabilities
//   y_knn    softmax(sim / tau2)-weighted average of neighbor label vectors
//   mask     labels with y_clf >= gamma (inclusive)
//   lambda   min of y_knn over the mask; 0 when the mask is empty
//   y_final  lambda * y_knn + (1 - lambda) * y_clf

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "denn/datastore.hpp"
#include "denn/encoder.hpp"
#include "denn/math.hpp"

namespace denn {

enum class InferenceMode { denn, classifier_only, knn_only, fixed_lambda };

/// How kNN probabilities on the high-confidence labels collapse to lambda.
enum class ConfidenceAggregate { min, mean };

std::string_view to_string(InferenceMode m);
InferenceMode inference_mode_from_string(std::string_view name);
std::string_view to_string(ConfidenceAggregate a);
ConfidenceAggregate aggregate_from_string(std::string_view name);

/// Defaults follow the published AAPD setting (k 30, tau2 0.05, gamma 0.7).
struct InferenceConfig {
  std::size_t k = 30;
  double tau2 = 0.05;
  double gamma = 0.7;
  InferenceMode mode = InferenceMode::denn;
  double fixed_lambda = 0.5;
  double decision_threshold = 0.5;
  ConfidenceAggregate aggregate = ConfidenceAggregate::min;

  void validate() const;
};

struct PredictionBundle {
  ProbabilityVector y_clf;
  ProbabilityVector y_knn;
  LabelVector high_conf_mask;
  double lambda = 0.0;
  ProbabilityVector y_final;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const PredictionBundle&, const PredictionBundle&) = default;
};

ProbabilityVector knn_predict(std::span<const Neighbor> neighbors, double tau2);

LabelVector high_confidence_subset(std::span<const double> y_clf, double gamma);

double debiased_lambda(std::span<const double> y_knn, std::span<const std::uint8_t> mask,
                       ConfidenceAggregate aggregate = ConfidenceAggregate::min);

ProbabilityVector combine(double lambda, std::span<const double> y_knn,
                          std::span<const double> y_clf);

PredictionBundle predict(const EncoderState& state, const Datastore& store, const Sample& sample,
                         const InferenceConfig& cfg);

/// predict() over a whole dataset; work is split across `threads` workers
/// (0 picks the hardware concurrency). Output order matches the input.
std::vector<PredictionBundle> predict_all(const EncoderState& state, const Datastore& store,
                                          const Dataset& data, const InferenceConfig& cfg,
                                          unsigned threads = 1);

}  // namespace denn
