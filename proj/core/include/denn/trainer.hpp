#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "denn/dataset.hpp"
#include "denn/encoder.hpp"
#include "denn/objective.hpp"
#include "denn/rng.hpp"

namespace denn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  EncoderParams first_moment;
  EncoderParams second_moment;
  std::uint64_t step = 0;

  static AdamState zeros(const EncoderConfig& cfg);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update applied in place.
void adam_step(EncoderParams& params, const ParameterGradients& grads, AdamState& adam,
               double learning_rate, const AdamConfig& cfg);

/// Training hyperparameters. Defaults follow the published AAPD setting
/// (batch 32, learning rate 5e-5, alpha 0.1, tau1 0.05).
struct TrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 5e-5;
  double alpha = 0.1;
  double tau1 = 0.05;
  ContrastiveVariant variant = ContrastiveVariant::dcl;
  std::size_t max_iters = 1000;
  std::size_t eval_interval = 0;  // 0: once per pass over the training set
  std::uint64_t seed = 1;
  AdamConfig adam{};

  std::size_t hidden_dim = 64;
  std::size_t embed_dim = 32;
  Activation activation = Activation::tanh;
  double dropout_rate = 0.1;
  double decision_threshold = 0.5;

  void validate() const;
  EncoderConfig encoder_config(std::size_t vocab_size, std::size_t num_classes) const;
  ObjectiveConfig objective() const { return {alpha, tau1, variant}; }
};

/// Everything besides the parameters needed to continue a run bit-exactly.
struct TrainingSnapshot {
  AdamState adam;
  Rng::State rng{};
  std::vector<std::uint32_t> order;  // current epoch permutation
  std::uint64_t cursor = 0;          // next position in `order`
  std::uint64_t iteration = 0;

  friend bool operator==(const TrainingSnapshot&, const TrainingSnapshot&) = default;
};

struct StepStats {
  std::uint64_t iteration = 0;
  BatchLoss loss;
};

/// Minibatch loop over a fixed training set. Each step draws N samples from a
/// shuffled epoch order, runs two dropout passes per sample (views i and
/// i + N), and applies one Adam update on the summed BCE + alpha * contrastive
/// loss.
class Trainer {
 public:
  Trainer(const Dataset& train, const TrainConfig& cfg);
  Trainer(const Dataset& train, const TrainConfig& cfg, EncoderState state,
          TrainingSnapshot snapshot);

  StepStats step();

  const EncoderState& state() const { return state_; }
  TrainingSnapshot snapshot() const;
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::size_t next_index();

  const Dataset& train_;
  TrainConfig cfg_;
  EncoderState state_;
  AdamState adam_;
  Rng rng_;
  std::vector<std::uint32_t> order_;
  std::size_t cursor_ = 0;
  std::uint64_t iteration_ = 0;
};

struct HistoryRecord {
  std::uint64_t iteration = 0;
  double bce = 0.0;
  double con = 0.0;
  double total = 0.0;
  std::optional<double> valid_micro_f1;
};

struct TrainResult {
  EncoderState best_state;
  std::vector<HistoryRecord> history;
  std::optional<double> best_valid_micro_f1;
  std::uint64_t best_iteration = 0;
  EncoderState last_state;
  TrainingSnapshot last_snapshot;
};

/// Parameters plus optimizer/sampler state of an interrupted run.
struct ResumePoint {
  EncoderState state;
  TrainingSnapshot snapshot;
};

using HistoryCallback = std::function<void(const HistoryRecord&)>;

/// Runs cfg.max_iters steps (continuing `resume` when given) and returns the
/// state with the best validation micro-F1, classifier only. With an empty
/// validation set the final state is returned.
TrainResult train(const Dataset& train, const Dataset& valid, const TrainConfig& cfg,
                  const HistoryCallback& on_record = {},
                  std::optional<ResumePoint> resume = std::nullopt);

/// Micro-F1 of the classifier head alone, thresholding probabilities.
double classifier_micro_f1(const EncoderState& state, const Dataset& data, double threshold);

}  // namespace denn
