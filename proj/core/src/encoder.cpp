#include "denn/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "denn/error.hpp"

namespace denn {

std::string_view to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  fail(Errc::config_error, "unknown activation '" + std::string(name) + "'");
}

void EncoderConfig::validate() const {
  require(vocab_size >= 1 && hidden_dim >= 1 && embed_dim >= 1 && num_classes >= 1,
          Errc::config_error, "encoder dimensions must be positive");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, Errc::config_error,
          "dropout_rate must be in [0, 1)");
}

EncoderParams EncoderParams::zeros(const EncoderConfig& cfg) {
  EncoderParams p;
  p.input_weights = Matrix(cfg.vocab_size, cfg.hidden_dim);
  p.hidden_bias.assign(cfg.hidden_dim, 0.0);
  p.embed_weights = Matrix(cfg.embed_dim, cfg.hidden_dim);
  p.embed_bias.assign(cfg.embed_dim, 0.0);
  p.classifier_weights = Matrix(cfg.num_classes, cfg.embed_dim);
  p.classifier_bias.assign(cfg.num_classes, 0.0);
  return p;
}

std::size_t EncoderParams::size() const {
  std::size_t n = 0;
  for_each_tensor([&](std::string_view, std::span<const double> t) { n += t.size(); });
  return n;
}

bool EncoderParams::same_shape(const EncoderParams& other) const {
  auto dims = [](const Matrix& m) { return std::pair{m.rows, m.cols}; };
  return dims(input_weights) == dims(other.input_weights) &&
         hidden_bias.size() == other.hidden_bias.size() &&
         dims(embed_weights) == dims(other.embed_weights) &&
         embed_bias.size() == other.embed_bias.size() &&
         dims(classifier_weights) == dims(other.classifier_weights) &&
         classifier_bias.size() == other.classifier_bias.size();
}

void EncoderParams::set_zero() {
  for_each_tensor([](std::string_view, std::span<double> t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
}

EncoderState init_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EncoderState state{cfg, EncoderParams::zeros(cfg), seed};
  Rng rng(seed);
  auto fill = [&](std::span<double> t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t) v = rng.uniform(-bound, bound);
  };
  auto& p = state.params;
  fill(p.input_weights.data, cfg.vocab_size);
  fill(p.hidden_bias, cfg.vocab_size);
  fill(p.embed_weights.data, cfg.hidden_dim);
  fill(p.embed_bias, cfg.hidden_dim);
  fill(p.classifier_weights.data, cfg.embed_dim);
  fill(p.classifier_bias, cfg.embed_dim);
  return state;
}

namespace {

double activate(Activation a, double x) {
  return a == Activation::relu ? std::max(x, 0.0) : std::tanh(x);
}

// Derivative expressed through the pre-activation and the activation value.
double activate_grad(Activation a, double pre, double act) {
  return a == Activation::relu ? (pre > 0.0 ? 1.0 : 0.0) : 1.0 - act * act;
}

ForwardTrace run_forward(const EncoderState& state, std::span<const SparseFeature> features,
                         DenseVector mask) {
  const auto& cfg = state.config;
  const auto& p = state.params;
  ForwardTrace t;
  t.features.assign(features.begin(), features.end());

  t.hidden_pre = p.hidden_bias;
  for (const auto& f : features) {
    require(f.index < cfg.vocab_size, Errc::dimension_mismatch,
            "forward: feature index outside the vocabulary");
    const auto w = p.input_weights.row(f.index);
    for (std::size_t j = 0; j < cfg.hidden_dim; ++j) t.hidden_pre[j] += f.value * w[j];
  }
  t.hidden_act.resize(cfg.hidden_dim);
  t.hidden.resize(cfg.hidden_dim);
  for (std::size_t j = 0; j < cfg.hidden_dim; ++j) {
    t.hidden_act[j] = activate(cfg.activation, t.hidden_pre[j]);
    t.hidden[j] = t.hidden_act[j] * mask[j];
  }
  t.dropout_mask = std::move(mask);

  t.embedding = p.embed_bias;
  for (std::size_t e = 0; e < cfg.embed_dim; ++e) {
    t.embedding[e] += dot(p.embed_weights.row(e), t.hidden);
  }
  t.logits = p.classifier_bias;
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    t.logits[c] += dot(p.classifier_weights.row(c), t.embedding);
  }
  return t;
}

}  // namespace

ForwardTrace forward(const EncoderState& state, const Sample& sample, DropoutMode mode, Rng& rng) {
  const auto& cfg = state.config;
  DenseVector mask(cfg.hidden_dim, 1.0);
  if (mode == DropoutMode::on && cfg.dropout_rate > 0.0) {
    const double keep = 1.0 - cfg.dropout_rate;
    const double scale = 1.0 / keep;
    for (double& m : mask) m = rng.bernoulli(keep) ? scale : 0.0;
  }
  return run_forward(state, sample.features, std::move(mask));
}

ForwardTrace forward(const EncoderState& state, std::span<const SparseFeature> features) {
  return run_forward(state, features, DenseVector(state.config.hidden_dim, 1.0));
}

ForwardTrace forward_with_mask(const EncoderState& state, std::span<const SparseFeature> features,
                               std::span<const double> mask) {
  require(mask.size() == state.config.hidden_dim, Errc::dimension_mismatch,
          "forward_with_mask: mask length differs from hidden_dim");
  return run_forward(state, features, DenseVector(mask.begin(), mask.end()));
}

ProbabilityVector classify(const ForwardTrace& trace) {
  ProbabilityVector out(trace.logits.size());
  std::transform(trace.logits.begin(), trace.logits.end(), out.begin(),
                 [](double z) { return sigmoid(z); });
  return out;
}

void backward(const EncoderState& state, const ForwardTrace& trace,
              std::span<const double> grad_embedding, std::span<const double> grad_logits,
              ParameterGradients& grads) {
  const auto& cfg = state.config;
  const auto& p = state.params;
  require(grad_embedding.size() == cfg.embed_dim, Errc::dimension_mismatch,
          "backward: embedding gradient has wrong length");
  require(grad_logits.size() == cfg.num_classes, Errc::dimension_mismatch,
          "backward: logit gradient has wrong length");
  require(trace.embedding.size() == cfg.embed_dim && trace.hidden.size() == cfg.hidden_dim,
          Errc::dimension_mismatch, "backward: trace does not match the encoder");
  require(grads.same_shape(p), Errc::dimension_mismatch,
          "backward: gradient buffer does not match the encoder");

  // Classifier head.
  DenseVector g_emb(grad_embedding.begin(), grad_embedding.end());
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    const double g = grad_logits[c];
    if (g == 0.0) continue;
    grads.classifier_bias[c] += g;
    auto gw = grads.classifier_weights.row(c);
    const auto w = p.classifier_weights.row(c);
    for (std::size_t e = 0; e < cfg.embed_dim; ++e) {
      gw[e] += g * trace.embedding[e];
      g_emb[e] += g * w[e];
    }
  }

  // Embedding layer.
  DenseVector g_hidden(cfg.hidden_dim, 0.0);
  for (std::size_t e = 0; e < cfg.embed_dim; ++e) {
    const double g = g_emb[e];
    if (g == 0.0) continue;
    grads.embed_bias[e] += g;
    auto gw = grads.embed_weights.row(e);
    const auto w = p.embed_weights.row(e);
    for (std::size_t j = 0; j < cfg.hidden_dim; ++j) {
      gw[j] += g * trace.hidden[j];
      g_hidden[j] += g * w[j];
    }
  }

  // Dropout and activation.
  for (std::size_t j = 0; j < cfg.hidden_dim; ++j) {
    g_hidden[j] *= trace.dropout_mask[j] *
                   activate_grad(cfg.activation, trace.hidden_pre[j], trace.hidden_act[j]);
    grads.hidden_bias[j] += g_hidden[j];
  }

  // Sparse input layer.
  for (const auto& f : trace.features) {
    auto gw = grads.input_weights.row(f.index);
    for (std::size_t j = 0; j < cfg.hidden_dim; ++j) gw[j] += f.value * g_hidden[j];
  }
}

ParameterGradients backward(const EncoderState& state, const ForwardTrace& trace,
                            std::span<const double> grad_embedding,
                            std::span<const double> grad_logits) {
  auto grads = EncoderParams::zeros(state.config);
  backward(state, trace, grad_embedding, grad_logits, grads);
  return grads;
}

}  // namespace denn
