#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "denn/encoder.hpp"
#include "denn/loss.hpp"

namespace denn {

struct ObjectiveConfig {
  double alpha = 0.1;
  double tau1 = 0.05;
  ContrastiveVariant variant = ContrastiveVariant::dcl;
};

struct BatchLoss {
  double bce = 0.0;    // summed over classes and over all 2N views
  double con = 0.0;    // summed over all 2N anchors
  double total = 0.0;  // bce + alpha * con
};

/// Total loss of a duplicated batch. `traces[i]` and `traces[(i + N) % 2N]`
/// must be two passes of the same sample; `labels[i]` belongs to `traces[i]`.
/// When `grads` is non-null the parameter gradient is added into it.
BatchLoss batch_objective(const EncoderState& state, std::span<const ForwardTrace> traces,
                          std::span<const LabelVector> labels, const ObjectiveConfig& cfg,
                          ParameterGradients* grads);

struct GradcheckConfig {
  std::size_t vocab_size = 24;
  std::size_t hidden_dim = 12;
  std::size_t embed_dim = 6;
  std::size_t num_classes = 5;
  std::size_t batch_size = 4;  // N; the checked batch holds 2N views
  Activation activation = Activation::tanh;
  double dropout_rate = 0.2;
  ObjectiveConfig objective{};
  double step = 1e-5;
  double rel_tolerance = 1e-4;
  double abs_tolerance = 1e-7;
  std::uint64_t seed = 7;
};

struct GradcheckReport {
  std::size_t parameters_checked = 0;
  std::size_t failures = 0;
  double max_rel_error = 0.0;  // over parameters above the absolute floor
  double max_abs_error = 0.0;
  bool passed() const { return failures == 0; }
};

/// Compares analytic gradients of the batch objective with central finite
/// differences on a random encoder and batch, dropout masks frozen.
GradcheckReport gradient_check(const GradcheckConfig& cfg);

}  // namespace denn
