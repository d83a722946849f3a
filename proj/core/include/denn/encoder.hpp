#pragma once

// Small trainable text encoder and the linear classifier head on top of it.
//
//   sparse x --(input_weights, hidden_bias)--> act --dropout--> hidden
//   hidden --(embed_weights, embed_bias)--> h            (the embedding)
//   h --(classifier_weights, classifier_bias)--> logits  (sigmoid gives y_clf)
//
// Dropout is inverted (kept units scaled by 1/(1-rate)) and applies to the
// hidden activations only. Embeddings are not normalized.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "denn/dataset.hpp"
#include "denn/math.hpp"
#include "denn/rng.hpp"

namespace denn {

enum class Activation : std::uint8_t { tanh = 0, relu = 1 };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden_dim = 64;
  std::size_t embed_dim = 32;
  std::size_t num_classes = 0;
  Activation activation = Activation::tanh;
  double dropout_rate = 0.1;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// All trainable tensors. Also used for gradients and optimizer moments,
/// which share the layout.
struct EncoderParams {
  Matrix input_weights;         // vocab x hidden; row v is feature v's column
  DenseVector hidden_bias;      // hidden
  Matrix embed_weights;         // embed x hidden
  DenseVector embed_bias;       // embed
  Matrix classifier_weights;    // C x embed
  DenseVector classifier_bias;  // C

  static EncoderParams zeros(const EncoderConfig& cfg);

  /// Calls f(name, span) for every tensor, in a fixed order.
  template <typename F>
  void for_each_tensor(F&& f) {
    f(std::string_view{"input_weights"}, std::span<double>(input_weights.data));
    f(std::string_view{"hidden_bias"}, std::span<double>(hidden_bias));
    f(std::string_view{"embed_weights"}, std::span<double>(embed_weights.data));
    f(std::string_view{"embed_bias"}, std::span<double>(embed_bias));
    f(std::string_view{"classifier_weights"}, std::span<double>(classifier_weights.data));
    f(std::string_view{"classifier_bias"}, std::span<double>(classifier_bias));
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f(std::string_view{"input_weights"}, std::span<const double>(input_weights.data));
    f(std::string_view{"hidden_bias"}, std::span<const double>(hidden_bias));
    f(std::string_view{"embed_weights"}, std::span<const double>(embed_weights.data));
    f(std::string_view{"embed_bias"}, std::span<const double>(embed_bias));
    f(std::string_view{"classifier_weights"}, std::span<const double>(classifier_weights.data));
    f(std::string_view{"classifier_bias"}, std::span<const double>(classifier_bias));
  }

  std::size_t size() const;
  bool same_shape(const EncoderParams& other) const;
  void set_zero();
  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

using ParameterGradients = EncoderParams;

struct EncoderState {
  EncoderConfig config;
  EncoderParams params;
  std::uint64_t seed = 0;

  friend bool operator==(const EncoderState&, const EncoderState&) = default;
};

/// Uniform(+-1/sqrt(fan_in)) initialization. The fan-in of the first layer is
/// the vocabulary size.
EncoderState init_encoder(const EncoderConfig& cfg, std::uint64_t seed);

enum class DropoutMode { off, on };

struct ForwardTrace {
  std::vector<SparseFeature> features;
  DenseVector hidden_pre;     // before activation
  DenseVector hidden_act;     // after activation
  DenseVector dropout_mask;   // 0 or 1/(1-rate); all ones when dropout is off
  DenseVector hidden;         // hidden_act * dropout_mask
  DenseVector embedding;      // h
  DenseVector logits;         // W1 h + b1
};

/// Forward pass. With DropoutMode::on a fresh mask is drawn from `rng`.
ForwardTrace forward(const EncoderState& state, const Sample& sample, DropoutMode mode, Rng& rng);

/// Deterministic forward pass (dropout off).
ForwardTrace forward(const EncoderState& state, std::span<const SparseFeature> features);

/// Forward pass replaying a previously drawn dropout mask.
ForwardTrace forward_with_mask(const EncoderState& state, std::span<const SparseFeature> features,
                               std::span<const double> mask);

ProbabilityVector classify(const ForwardTrace& trace);

/// Reverse-mode pass through `trace`. Upstream gradients may arrive through
/// the embedding (contrastive path) and the logits (classification path) at
/// the same time. Results are added into `grads`.
void backward(const EncoderState& state, const ForwardTrace& trace,
              std::span<const double> grad_embedding, std::span<const double> grad_logits,
              ParameterGradients& grads);

ParameterGradients backward(const EncoderState& state, const ForwardTrace& trace,
                            std::span<const double> grad_embedding,
                            std::span<const double> grad_logits);

}  // namespace denn
