#include "config_io.hpp"

#include <sstream>

#include "denn/error.hpp"

namespace denn::cli {
namespace {

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

DatasetConfig dataset_config(const KeyValueConfig& kv) {
  DatasetConfig c;
  c.num_classes = kv.get_uint("num_classes", c.num_classes);
  c.num_clusters = kv.get_uint("num_clusters", c.num_clusters);
  c.modes_per_cluster = kv.get_uint("modes_per_cluster", c.modes_per_cluster);
  c.train_samples = kv.get_uint("train_samples", c.train_samples);
  c.valid_samples = kv.get_uint("valid_samples", c.valid_samples);
  c.test_samples = kv.get_uint("test_samples", c.test_samples);
  c.vocab_size = kv.get_uint("vocab_size", c.vocab_size);
  c.tokens_per_sample = kv.get_uint("tokens_per_sample", c.tokens_per_sample);
  c.topic_fraction = kv.get_double("topic_fraction", c.topic_fraction);
  c.secondary_cluster_prob = kv.get_double("secondary_cluster_prob", c.secondary_cluster_prob);
  c.label_noise = kv.get_double("label_noise", c.label_noise);
  c.seed = kv.get_uint("seed", c.seed);
  c.validate();
  return c;
}

TrainConfig train_config(const KeyValueConfig& kv) {
  TrainConfig c;
  c.batch_size = kv.get_uint("batch_size", c.batch_size);
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.alpha = kv.get_double("alpha", c.alpha);
  c.tau1 = kv.get_double("tau1", c.tau1);
  c.variant = variant_from_string(kv.get_string("variant", std::string(to_string(c.variant))));
  c.max_iters = kv.get_uint("max_iters", c.max_iters);
  c.eval_interval = kv.get_uint("eval_interval", c.eval_interval);
  c.seed = kv.get_uint("seed", c.seed);
  c.adam.beta1 = kv.get_double("adam_beta1", c.adam.beta1);
  c.adam.beta2 = kv.get_double("adam_beta2", c.adam.beta2);
  c.adam.epsilon = kv.get_double("adam_epsilon", c.adam.epsilon);
  c.hidden_dim = kv.get_uint("hidden_dim", c.hidden_dim);
  c.embed_dim = kv.get_uint("embed_dim", c.embed_dim);
  c.activation = activation_from_string(kv.get_string("activation", std::string(to_string(c.activation))));
  c.dropout_rate = kv.get_double("dropout_rate", c.dropout_rate);
  c.decision_threshold = kv.get_double("decision_threshold", c.decision_threshold);
  c.validate();
  return c;
}

InferenceConfig inference_config(const KeyValueConfig& kv) {
  InferenceConfig c;
  c.k = kv.get_uint("k", c.k);
  c.tau2 = kv.get_double("tau2", c.tau2);
  c.gamma = kv.get_double("gamma", c.gamma);
  c.mode = inference_mode_from_string(kv.get_string("mode", std::string(to_string(c.mode))));
  c.fixed_lambda = kv.get_double("fixed_lambda", c.fixed_lambda);
  c.decision_threshold = kv.get_double("decision_threshold", c.decision_threshold);
  c.aggregate = aggregate_from_string(kv.get_string("aggregate", std::string(to_string(c.aggregate))));
  c.validate();
  return c;
}

KeyValueConfig to_kv(const DatasetConfig& c) {
  KeyValueConfig kv;
  kv.set("num_classes", std::to_string(c.num_classes));
  kv.set("num_clusters", std::to_string(c.num_clusters));
  kv.set("modes_per_cluster", std::to_string(c.modes_per_cluster));
  kv.set("train_samples", std::to_string(c.train_samples));
  kv.set("valid_samples", std::to_string(c.valid_samples));
  kv.set("test_samples", std::to_string(c.test_samples));
  kv.set("vocab_size", std::to_string(c.vocab_size));
  kv.set("tokens_per_sample", std::to_string(c.tokens_per_sample));
  kv.set("topic_fraction", num(c.topic_fraction));
  kv.set("secondary_cluster_prob", num(c.secondary_cluster_prob));
  kv.set("label_noise", num(c.label_noise));
  kv.set("seed", std::to_string(c.seed));
  return kv;
}

KeyValueConfig to_kv(const TrainConfig& c) {
  KeyValueConfig kv;
  kv.set("batch_size", std::to_string(c.batch_size));
  kv.set("learning_rate", num(c.learning_rate));
  kv.set("alpha", num(c.alpha));
  kv.set("tau1", num(c.tau1));
  kv.set("variant", std::string(to_string(c.variant)));
  kv.set("max_iters", std::to_string(c.max_iters));
  kv.set("eval_interval", std::to_string(c.eval_interval));
  kv.set("seed", std::to_string(c.seed));
  kv.set("adam_beta1", num(c.adam.beta1));
  kv.set("adam_beta2", num(c.adam.beta2));
  kv.set("adam_epsilon", num(c.adam.epsilon));
  kv.set("hidden_dim", std::to_string(c.hidden_dim));
  kv.set("embed_dim", std::to_string(c.embed_dim));
  kv.set("activation", std::string(to_string(c.activation)));
  kv.set("dropout_rate", num(c.dropout_rate));
  kv.set("decision_threshold", num(c.decision_threshold));
  return kv;
}

KeyValueConfig to_kv(const InferenceConfig& c) {
  KeyValueConfig kv;
  kv.set("k", std::to_string(c.k));
  kv.set("tau2", num(c.tau2));
  kv.set("gamma", num(c.gamma));
  kv.set("mode", std::string(to_string(c.mode)));
  kv.set("fixed_lambda", num(c.fixed_lambda));
  kv.set("decision_threshold", num(c.decision_threshold));
  kv.set("aggregate", std::string(to_string(c.aggregate)));
  return kv;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& kv : {to_kv(DatasetConfig{}), to_kv(TrainConfig{}), to_kv(InferenceConfig{})}) {
      for (const auto& [k, v] : kv.entries()) out.push_back(k);
    }
    for (const char* k : {"threads", "sweep_k", "sweep_gamma", "sweep_store_fraction",
                          "ablate_variants", "fixed_lambda_baseline"}) {
      out.emplace_back(k);
    }
    return out;
  }();
  return keys;
}

void reject_unknown_keys(const KeyValueConfig& kv) {
  const auto unknown = kv.unknown_keys(known_keys());
  if (!unknown.empty()) fail(Errc::config_error, "unknown config key '" + unknown.front() + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

}  // namespace denn::cli
