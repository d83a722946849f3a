#include "denn/inference.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <thread>

#include "denn/error.hpp"

namespace denn {

std::string_view to_string(InferenceMode m) {
  switch (m) {
    case InferenceMode::denn: return "denn";
    case InferenceMode::classifier_only: return "classifier_only";
    case InferenceMode::knn_only: return "knn_only";
    case InferenceMode::fixed_lambda: return "fixed_lambda";
  }
  return "denn";
}

InferenceMode inference_mode_from_string(std::string_view name) {
  if (name == "denn") return InferenceMode::denn;
  if (name == "classifier_only") return InferenceMode::classifier_only;
  if (name == "knn_only") return InferenceMode::knn_only;
  if (name == "fixed_lambda") return InferenceMode::fixed_lambda;
  fail(Errc::config_error, "unknown inference mode '" + std::string(name) + "'");
}

std::string_view to_string(ConfidenceAggregate a) {
  return a == ConfidenceAggregate::mean ? "mean" : "min";
}

ConfidenceAggregate aggregate_from_string(std::string_view name) {
  if (name == "min") return ConfidenceAggregate::min;
  if (name == "mean") return ConfidenceAggregate::mean;
  fail(Errc::config_error, "unknown confidence aggregate '" + std::string(name) + "'");
}

void InferenceConfig::validate() const {
  require(k >= 1, Errc::config_error, "k must be >= 1");
  require(tau2 > 0.0, Errc::config_error, "tau2 must be > 0");
  require(gamma > 0.0 && gamma < 1.0, Errc::config_error, "gamma must be in (0, 1)");
  require(fixed_lambda >= 0.0 && fixed_lambda <= 1.0, Errc::config_error,
          "fixed_lambda must be in [0, 1]");
  require(decision_threshold > 0.0 && decision_threshold < 1.0, Errc::config_error,
          "decision_threshold must be in (0, 1)");
}

ProbabilityVector knn_predict(std::span<const Neighbor> neighbors, double tau2) {
  require(!neighbors.empty(), Errc::invalid_argument, "knn_predict: no neighbors");
  std::vector<double> sims;
  sims.reserve(neighbors.size());
  for (const auto& n : neighbors) sims.push_back(n.similarity);
  const auto beta = softmax_temp(sims, tau2);
  const std::size_t classes = neighbors.front().labels.size();
  ProbabilityVector y(classes, 0.0);
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    require(neighbors[i].labels.size() == classes, Errc::dimension_mismatch,
            "knn_predict: neighbors disagree on label width");
    for (std::size_t c = 0; c < classes; ++c) {
      if (neighbors[i].labels[c] != 0) y[c] += beta[i];
    }
  }
  for (double& v : y) v = std::min(v, 1.0);
  return y;
}

LabelVector high_confidence_subset(std::span<const double> y_clf, double gamma) {
  LabelVector mask(y_clf.size());
  std::transform(y_clf.begin(), y_clf.end(), mask.begin(),
                 [gamma](double p) { return static_cast<std::uint8_t>(p >= gamma); });
  return mask;
}

double debiased_lambda(std::span<const double> y_knn, std::span<const std::uint8_t> mask,
                       ConfidenceAggregate aggregate) {
  require(y_knn.size() == mask.size(), Errc::dimension_mismatch,
          "debiased_lambda: mask length differs from y_knn");
  double lowest = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < mask.size(); ++c) {
    if (mask[c] == 0) continue;
    lowest = std::min(lowest, y_knn[c]);
    sum += y_knn[c];
    ++count;
  }
  if (count == 0) return 0.0;
  const double lambda = aggregate == ConfidenceAggregate::min ? lowest : sum / count;
  return std::clamp(lambda, 0.0, 1.0);
}

ProbabilityVector combine(double lambda, std::span<const double> y_knn,
                          std::span<const double> y_clf) {
  require(lambda >= 0.0 && lambda <= 1.0, Errc::invalid_argument,
          "combine: lambda outside [0, 1]");
  require(y_knn.size() == y_clf.size(), Errc::dimension_mismatch,
          "combine: prediction lengths differ");
  ProbabilityVector y(y_clf.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    y[c] = lambda * y_knn[c] + (1.0 - lambda) * y_clf[c];
  }
  return y;
}

PredictionBundle predict(const EncoderState& state, const Datastore& store, const Sample& sample,
                         const InferenceConfig& cfg) {
  cfg.validate();
  require(store.dim() == state.config.embed_dim && store.num_classes() == state.config.num_classes,
          Errc::dimension_mismatch, "predict: datastore does not match the model");
  require(store.size() > 0, Errc::invalid_argument, "predict: empty datastore");

  PredictionBundle b;
  const auto trace = forward(state, sample.features);
  b.y_clf = classify(trace);
  b.neighbors = retrieve_topk(store, trace.embedding, cfg.k);
  b.y_knn = knn_predict(b.neighbors, cfg.tau2);
  b.high_conf_mask = high_confidence_subset(b.y_clf, cfg.gamma);
  switch (cfg.mode) {
    case InferenceMode::denn:
      b.lambda = debiased_lambda(b.y_knn, b.high_conf_mask, cfg.aggregate);
      break;
    case InferenceMode::classifier_only: b.lambda = 0.0; break;
    case InferenceMode::knn_only: b.lambda = 1.0; break;
    case InferenceMode::fixed_lambda: b.lambda = cfg.fixed_lambda; break;
  }
  b.y_final = combine(b.lambda, b.y_knn, b.y_clf);
  return b;
}

std::vector<PredictionBundle> predict_all(const EncoderState& state, const Datastore& store,
                                          const Dataset& data, const InferenceConfig& cfg,
                                          unsigned threads) {
  std::vector<PredictionBundle> out(data.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, data.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(state, store, data.samples[i], cfg);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < data.size(); i += threads) {
          out[i] = predict(state, store, data.samples[i], cfg);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace denn
