#include "denn/objective.hpp"

#include <algorithm>
#include <cmath>

#include "denn/error.hpp"
#include "denn/rng.hpp"

namespace denn {

BatchLoss batch_objective(const EncoderState& state, std::span<const ForwardTrace> traces,
                          std::span<const LabelVector> labels, const ObjectiveConfig& cfg,
                          ParameterGradients* grads) {
  require(traces.size() == labels.size(), Errc::dimension_mismatch,
          "batch_objective: one label vector per trace");
  const std::size_t n = traces.size();

  BatchLoss loss;
  std::vector<std::vector<double>> grad_logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto bce = bce_loss(classify(traces[i]), labels[i]);
    loss.bce += bce.loss;
    grad_logits[i] = std::move(bce.grad_logits);
  }

  std::vector<DenseVector> embeddings;
  embeddings.reserve(n);
  for (const auto& t : traces) embeddings.push_back(t.embedding);
  const auto sims = cosine_similarity_matrix(embeddings);
  const auto con = contrastive_loss(sims, labels, cfg.tau1, cfg.variant);
  loss.con = con.loss;
  loss.total = total_loss(loss.bce, loss.con, cfg.alpha);

  if (grads != nullptr) {
    auto grad_emb = similarity_grad_to_embeddings(embeddings, con.grad_similarities);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& g : grad_emb[i]) g *= cfg.alpha;
      backward(state, traces[i], grad_emb[i], grad_logits[i], *grads);
    }
  }
  return loss;
}

GradcheckReport gradient_check(const GradcheckConfig& cfg) {
  require(cfg.batch_size >= 1, Errc::invalid_argument, "gradient_check: batch_size must be >= 1");
  EncoderConfig enc{cfg.vocab_size, cfg.hidden_dim, cfg.embed_dim, cfg.num_classes,
                    cfg.activation, cfg.dropout_rate};
  EncoderState state = init_encoder(enc, cfg.seed);
  Rng rng(cfg.seed ^ 0x5eedULL);

  std::vector<Sample> samples(cfg.batch_size);
  for (auto& s : samples) {
    const std::size_t nnz = 1 + rng.below(std::min<std::size_t>(cfg.vocab_size, 6));
    for (std::size_t k = 0; k < nnz; ++k) {
      s.features.push_back({static_cast<std::uint32_t>(rng.below(cfg.vocab_size)),
                            rng.uniform(0.2, 1.5)});
    }
    s.labels.assign(cfg.num_classes, 0);
    s.labels[rng.below(cfg.num_classes)] = 1;
    for (auto& l : s.labels) l = l != 0 || rng.bernoulli(0.3) ? 1 : 0;
  }

  const std::size_t two_n = 2 * cfg.batch_size;
  std::vector<DenseVector> masks;
  std::vector<LabelVector> labels;
  for (std::size_t v = 0; v < two_n; ++v) {
    const auto& s = samples[v % cfg.batch_size];
    masks.push_back(forward(state, s, DropoutMode::on, rng).dropout_mask);
    labels.push_back(s.labels);
  }

  auto evaluate = [&](ParameterGradients* grads) {
    std::vector<ForwardTrace> traces;
    traces.reserve(two_n);
    for (std::size_t v = 0; v < two_n; ++v) {
      traces.push_back(forward_with_mask(state, samples[v % cfg.batch_size].features, masks[v]));
    }
    return batch_objective(state, traces, labels, cfg.objective, grads).total;
  };

  auto analytic = EncoderParams::zeros(enc);
  evaluate(&analytic);

  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> analytic_tensors;
  state.params.for_each_tensor([&](std::string_view, std::span<double> t) { params.push_back(t); });
  analytic.for_each_tensor(
      [&](std::string_view, std::span<const double> t) { analytic_tensors.push_back(t); });

  GradcheckReport report;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t k = 0; k < params[t].size(); ++k) {
      double& theta = params[t][k];
      const double saved = theta;
      theta = saved + cfg.step;
      const double up = evaluate(nullptr);
      theta = saved - cfg.step;
      const double down = evaluate(nullptr);
      theta = saved;
      const double numeric = (up - down) / (2.0 * cfg.step);
      const double a = analytic_tensors[t][k];
      const double abs_err = std::abs(a - numeric);
      ++report.parameters_checked;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (abs_err <= cfg.abs_tolerance) continue;
      const double rel = abs_err / std::max(std::abs(a), std::abs(numeric));
      report.max_rel_error = std::max(report.max_rel_error, rel);
      if (rel > cfg.rel_tolerance) ++report.failures;
    }
  }
  return report;
}

}  // namespace denn
