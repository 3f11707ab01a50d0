#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmcl/config.hpp"
#include "qmcl/dataset.hpp"
#include "qmcl/encoders.hpp"

namespace qmcl {

/// Both encoders plus the learned log-temperature.
struct Model {
  QstConvConfig eeg_config;
  ImageHeadConfig image_config;
  QstConvParams eeg;
  ImageHeadParams image;
  Tensor log_temperature;  // [1]

  static Model init(const RunConfig& config, std::uint64_t seed);

  /// Trainable tensors with "eeg." / "image." prefixes, then "log_temperature".
  std::vector<NamedParam> trainable();
  /// trainable() plus BN running statistics; everything persisted.
  std::vector<NamedParam> state();
};

/// Saves the model state as a tensor bundle (see save_tensor_bundle).
void save_model(const std::filesystem::path& path, Model& model);
/// Rebuilds a model shaped by `config` and fills it from a bundle.
Model load_model(const std::filesystem::path& path, const RunConfig& config);

/// One line of the metrics stream.
struct MetricsRecord {
  int run_id = 0;
  int epoch = 0;  // -1 for a standalone evaluation
  std::optional<double> train_loss;
  double top1 = 0.0;
  double top5 = 0.0;
  std::optional<double> wall_time;

  nlohmann::ordered_json to_json() const;
  static MetricsRecord from_json(const nlohmann::json& j);
  /// Compact JSON followed by '\n'.
  std::string to_line() const;
};

using MetricsSink = std::function<void(const MetricsRecord&)>;

struct TrainResult {
  Model model;
  std::vector<MetricsRecord> metrics;
  double initial_loss = 0.0;  // mean batch loss of epoch 0
  double final_loss = 0.0;    // mean batch loss of the last epoch
};

/// Joint optimisation of both encoders and the log-temperature on the train
/// split. `seed` drives initialisation and shuffling. Each epoch is followed
/// by a zero-shot evaluation; one MetricsRecord per epoch goes to `sink`.
/// Throws NumericError if a batch loss is not finite.
TrainResult train(const RunConfig& config, const Dataset& data, std::uint64_t seed,
                  int run_id = 0, const MetricsSink& sink = {});

/// Convenience overload using config.seed.
TrainResult train(const RunConfig& config, const Dataset& data, const MetricsSink& sink = {});

/// Score matrix of every test-split sample against every test-class image
/// embedding, plus each query's true column.
struct ZeroShotScores {
  Tensor scores;  // [N_query, N_test_classes]
  std::vector<std::size_t> truth;
};

/// Encoders run in eval mode; a class in both splits is a ContractError.
ZeroShotScores score_zero_shot(Model& model, const Dataset& data);

/// Top-k accuracy for each k in `k_list`; k is capped at the number of test
/// classes.
std::vector<double> zero_shot_topk(Model& model, const Dataset& data,
                                   const std::vector<std::size_t>& k_list);

/// Record with top1/top5 filled in (epoch -1, no loss).
MetricsRecord evaluate_zero_shot(Model& model, const Dataset& data, int run_id = 0);

/// Dataset named by config.manifest_path, or the synthetic set the config
/// describes when that is empty.
Dataset dataset_for(const RunConfig& config);
SyntheticSpec synthetic_spec(const RunConfig& config);

}  // namespace qmcl
