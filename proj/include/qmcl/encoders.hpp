#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "qmcl/ops.hpp"
#include "qmcl/tape.hpp"
#include "qmcl/tensor.hpp"

namespace qmcl {

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

/// Sizes of the spatial-temporal EEG encoder.
struct QstConvConfig {
  std::size_t electrodes = 64;       // E
  std::size_t samples = 250;         // T
  std::size_t spatial_maps = 8;      // F
  std::size_t temporal_maps = 8;     // G
  std::size_t temporal_kernel = 16;  // k_t
  std::size_t embed_dim = 64;        // D
  int n_qubits = 10;
  int n_layers = 4;

  void validate() const;
  std::size_t temporal_out() const { return samples - temporal_kernel + 1; }
  std::size_t flat_features() const { return temporal_maps * temporal_out(); }
};

struct ImageHeadConfig {
  std::size_t image_dim = 768;  // D_img, width of the frozen backbone embedding
  std::size_t embed_dim = 64;
  int n_qubits = 10;
  int n_layers = 4;

  void validate() const;
};

struct QstConvParams {
  Tensor spatial_kernel;   // [F, 1, E, 1]
  Tensor bn1_gamma, bn1_beta;
  BatchNormStats bn1;
  Tensor temporal_kernel;  // [G, F, 1, k_t]
  Tensor bn2_gamma, bn2_beta;
  BatchNormStats bn2;
  Tensor proj_in_weight;   // [G * T', n_qubits]
  Tensor proj_in_bias;     // [n_qubits]
  Tensor vqc_weights;      // [n_layers, n_qubits]
  Tensor proj_out_weight;  // [n_qubits, D]
  Tensor proj_out_bias;    // [D]

  /// Uniform(+-1/sqrt(fan_in)) kernels and linear weights, zero biases,
  /// unit BN scale, VQC angles uniform in [0, 2 pi).
  static QstConvParams init(const QstConvConfig& config, std::mt19937_64& rng);

  std::vector<NamedParam> trainable();
  /// Non-trainable state persisted with the model (BN running statistics).
  std::vector<NamedParam> buffers();
};

struct ImageHeadParams {
  Tensor proj_in_weight;   // [D_img, n_qubits]
  Tensor proj_in_bias;     // [n_qubits]
  Tensor vqc_weights;      // [n_layers, n_qubits]
  Tensor proj_out_weight;  // [n_qubits, D]
  Tensor proj_out_bias;    // [D]

  static ImageHeadParams init(const ImageHeadConfig& config, std::mt19937_64& rng);

  std::vector<NamedParam> trainable();
};

/// spatial conv -> BN -> ELU -> temporal conv -> BN -> ELU -> flatten ->
/// linear -> pi*tanh -> VQC -> linear -> L2 normalise.
/// eeg: [B, 1, E, T] -> [B, D] with unit rows.
Var qstconv_forward(Tape& tape, Var eeg, QstConvParams& params, const QstConvConfig& config,
                    BatchNormMode mode);

/// linear -> pi*tanh -> VQC -> linear -> L2 normalise over precomputed
/// backbone embeddings [B, D_img] -> [B, D].
Var image_head_forward(Tape& tape, Var image_embedding, ImageHeadParams& params,
                       const ImageHeadConfig& config);

}  // namespace qmcl
