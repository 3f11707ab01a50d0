#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qmcl/adam.hpp"
#include "qmcl/encoders.hpp"

namespace qmcl {

/// Every hyperparameter of an experiment. JSON keys match the member names;
/// absent keys keep the defaults below and unknown keys are rejected.
struct RunConfig {
  // Quantum encoding layer.
  int n_qubits = 10;
  int n_layers = 4;

  // Optimiser and schedule.
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double weight_decay = 0.0;
  int epochs = 200;
  int batch_size = 64;
  double tau_init = std::log(1.0 / 0.07);
  std::uint64_t seed = 0;
  int n_runs = 5;

  // Encoder sizes.
  std::size_t E = 64;
  std::size_t T = 250;
  std::size_t F = 8;
  std::size_t G = 8;
  std::size_t k_t = 16;
  std::size_t D = 64;
  std::size_t D_img = 768;

  // Dataset: a manifest on disk, or (when empty) a synthetic set built from
  // the fields below.
  std::string manifest_path;
  std::uint64_t data_seed = 0;
  int n_train_classes = 16;
  int n_test_classes = 8;
  int samples_per_class = 20;
  double noise_sigma = 0.3;
  int latent_dim = 2;

  // Emit wall-clock seconds in metrics records. Off by default so that
  // metrics streams are reproducible byte for byte.
  bool record_wall_time = false;

  /// Throws ConfigError on any non-finite or out-of-range field.
  void validate() const;

  QstConvConfig eeg_encoder() const;
  ImageHeadConfig image_head() const;
  AdamOptions adam() const;

  nlohmann::ordered_json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace qmcl
