#pragma once

// Finite-difference check of the full batch objective, written against the
// public forward/objective API only. Dropout masks are drawn once and replayed.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "denn/encoder.hpp"
#include "denn/objective.hpp"
#include "denn/rng.hpp"
#include "support/oracles.hpp"

namespace fd {

struct Setup {
  std::size_t vocab = 16;
  std::size_t hidden = 8;
  std::size_t embed = 4;
  std::size_t classes = 4;
  std::size_t n = 3;  // samples; the batch holds 2n views
  denn::Activation activation = denn::Activation::tanh;
  double dropout = 0.2;
  denn::ObjectiveConfig objective{};
  std::uint64_t seed = 1;
};

struct Outcome {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;  // over entries above the absolute floor
  std::string first_failure;
};

inline Setup random_setup(denn::Rng& rng) {
  Setup s;
  s.vocab = 4 + rng.below(29);    // <= 32
  s.hidden = 2 + rng.below(15);   // <= 16
  s.embed = 2 + rng.below(7);     // <= 8
  s.classes = 2 + rng.below(5);   // <= 6
  s.n = 1 + rng.below(8);         // 2n <= 16
  s.activation = rng.bernoulli(0.5) ? denn::Activation::tanh : denn::Activation::relu;
  s.dropout = rng.uniform(0.0, 0.4);
  s.objective.alpha = rng.uniform(0.05, 1.0);
  s.objective.tau1 = rng.uniform(0.05, 0.5);
  const denn::ContrastiveVariant variants[] = {
      denn::ContrastiveVariant::dcl, denn::ContrastiveVariant::ucl,
      denn::ContrastiveVariant::scl, denn::ContrastiveVariant::wscl};
  s.objective.variant = variants[rng.below(4)];
  s.seed = rng.next_u64();
  return s;
}

inline Outcome check(const Setup& setup, double step = 1e-5, double rel = 1e-4,
                     double abs_floor = 1e-7) {
  using namespace denn;
  EncoderConfig cfg;
  cfg.vocab_size = setup.vocab;
  cfg.hidden_dim = setup.hidden;
  cfg.embed_dim = setup.embed;
  cfg.num_classes = setup.classes;
  cfg.activation = setup.activation;
  cfg.dropout_rate = setup.dropout;
  Rng rng(setup.seed);
  EncoderState state = init_encoder(cfg, rng.next_u64());
  for (auto* b : {&state.params.hidden_bias, &state.params.embed_bias,
                  &state.params.classifier_bias}) {
    for (auto& x : *b) x = rng.uniform(-0.3, 0.3);
  }

  std::vector<Sample> samples(setup.n);
  for (auto& s : samples) {
    for (std::uint32_t v = 0; v < setup.vocab; ++v) {
      if (rng.bernoulli(0.4)) s.features.push_back({v, rng.uniform(0.2, 1.0)});
    }
    if (s.features.empty()) s.features.push_back({0, 1.0});
    s.labels.assign(setup.classes, 0);
    for (auto& y : s.labels) y = rng.bernoulli(0.4) ? 1 : 0;
    s.labels[rng.below(setup.classes)] = 1;
  }
  const std::size_t views = 2 * setup.n;
  std::vector<ForwardTrace> traces;
  std::vector<LabelVector> labels;
  for (std::size_t i = 0; i < views; ++i) {
    const Sample& s = samples[i % setup.n];
    traces.push_back(forward(state, s, DropoutMode::on, rng));
    labels.push_back(s.labels);
  }
  std::vector<DenseVector> masks;
  for (const auto& t : traces) masks.push_back(t.dropout_mask);

  auto loss_at = [&](const EncoderState& probe) {
    std::vector<ForwardTrace> tr;
    for (std::size_t i = 0; i < views; ++i) {
      tr.push_back(forward_with_mask(probe, samples[i % setup.n].features, masks[i]));
    }
    return batch_objective(probe, tr, labels, setup.objective, nullptr).total;
  };

  ParameterGradients grads = EncoderParams::zeros(cfg);
  batch_objective(state, traces, labels, setup.objective, &grads);
  std::vector<double> analytic;
  grads.for_each_tensor([&](std::string_view, std::span<const double> v) {
    analytic.insert(analytic.end(), v.begin(), v.end());
  });

  Outcome out;
  std::size_t flat = 0;
  EncoderState probe = state;
  probe.params.for_each_tensor([&](std::string_view name, std::span<double> v) {
    for (std::size_t i = 0; i < v.size(); ++i, ++flat) {
      const double saved = v[i];
      v[i] = saved + step;
      const double up = loss_at(probe);
      v[i] = saved - step;
      const double down = loss_at(probe);
      v[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = analytic[flat];
      ++out.checked;
      const double err = std::abs(a - numeric);
      if (err > abs_floor) {
        out.worst_rel = std::max(out.worst_rel, err / std::max(std::abs(a), std::abs(numeric)));
      }
      if (!oracle::close(a, numeric, rel, abs_floor)) {
        if (out.failures == 0) {
          out.first_failure = std::string(name) + "[" + std::to_string(i) +
                              "] analytic=" + std::to_string(a) +
                              " numeric=" + std::to_string(numeric);
        }
        ++out.failures;
      }
    }
  });
  return out;
}

}  // namespace fd
