#pragma once

#include <string>
#include <vector>

#include "denn/dataset.hpp"
#include "denn/inference.hpp"
#include "denn/kv_config.hpp"
#include "denn/trainer.hpp"

namespace denn::cli {

DatasetConfig dataset_config(const KeyValueConfig& kv);
TrainConfig train_config(const KeyValueConfig& kv);
InferenceConfig inference_config(const KeyValueConfig& kv);

KeyValueConfig to_kv(const DatasetConfig& cfg);
KeyValueConfig to_kv(const TrainConfig& cfg);
KeyValueConfig to_kv(const InferenceConfig& cfg);

/// Every key any command understands.
const std::vector<std::string>& known_keys();

/// Throws config_error naming the first unrecognized key.
void reject_unknown_keys(const KeyValueConfig& kv);

std::vector<std::string> split_list(const std::string& text);

}  // namespace denn::cli
