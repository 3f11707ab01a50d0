#pragma once

#include <cstddef>

#include "qmcl/tape.hpp"
#include "qmcl/tensor.hpp"

namespace qmcl {

/// y = x W + b with x [B, in], W [in, out], b [out].
Var linear(Var x, Var weight, Var bias);

/// Spatial convolution whose kernel spans every electrode:
/// x [B, 1, E, T], kernel [F, 1, E, 1] -> [B, F, 1, T].
Var conv_spatial(Var x, Var kernel);

/// Temporal convolution over all input maps, no padding:
/// x [B, F, 1, T], kernel [G, F, 1, k_t] -> [B, G, 1, (T - k_t) / stride + 1].
Var conv_temporal(Var x, Var kernel, std::size_t stride = 1);

enum class BatchNormMode { Train, Eval };

/// Running statistics for batch_norm, one entry per channel.
struct BatchNormStats {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-8;

  static BatchNormStats for_channels(std::size_t channels);
};

/// Per-channel standardisation of x [B, C, ...] over the batch and trailing
/// axes, followed by y = gamma * xhat + beta. Train mode uses batch statistics
/// (biased variance), needs B >= 2, and updates `stats`; eval mode reads
/// `stats` and leaves it untouched.
Var batch_norm(Var x, Var gamma, Var beta, BatchNormStats& stats, BatchNormMode mode);

/// x if x > 0 else alpha (e^x - 1).
Var elu(Var x, double alpha = 1.0);

/// Scales every row of x [B, D] to unit L2 norm. Throws NumericError when a
/// row norm is below 1e-12.
Var l2_normalize(Var x);

/// pi * tanh(x): bounds rotation angles to (-pi, pi).
Var angle_squash(Var x);

/// [B, ...] -> [B, prod(...)].
Var flatten(Var x);

/// Quantum encoding layer on every row of x [B, n_qubits] with trainable
/// weights [n_layers, n_qubits]. The backward pass uses the parameter-shift
/// rule for both inputs and weights.
Var vqc_layer(Var x, Var weights);

/// sum_i x_i * w_i; a scalar probe used by gradient checks.
Var weighted_sum(Var x, const Tensor& weights);

}  // namespace qmcl
