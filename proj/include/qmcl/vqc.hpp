#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qmcl/statevector.hpp"

namespace qmcl {

/// Trainable part of the quantum encoding layer: n_layers x n_qubits RY
/// angles stored row-major (layer-major).
struct QuantumLayerParams {
  int n_qubits = 1;
  int n_layers = 1;
  std::vector<double> weights;

  static QuantumLayerParams zeros(int n_qubits, int n_layers);

  double weight(int layer, int qubit) const { return weights[layer * n_qubits + qubit]; }
  double& weight(int layer, int qubit) { return weights[layer * n_qubits + qubit]; }

  /// Throws ConfigError / ShapeError / NumericError on a malformed layout.
  void validate() const;
};

/// Jacobian of the n_qubits outputs with respect to every rotation angle.
struct VqcGradient {
  int n_qubits = 0;
  int n_layers = 0;
  std::vector<double> d_weights;  // [layer][qubit][output]
  std::vector<double> d_inputs;   // [input][output]

  double dw(int layer, int qubit, int output) const {
    return d_weights[(layer * n_qubits + qubit) * n_qubits + output];
  }
  double dx(int input, int output) const { return d_inputs[input * n_qubits + output]; }
};

/// Gate list of the encoding circuit: RY(x_i) on every qubit, then per layer a
/// CNOT ring i -> (i+1) mod n followed by RY(w[l][i]) on every qubit. The ring
/// is omitted when n_qubits == 1.
std::vector<GateOp> vqc_circuit(std::span<const double> x, const QuantumLayerParams& params);

/// Per-qubit <sigma_z> after running vqc_circuit on |0...0>.
std::vector<double> vqc_forward(std::span<const double> x, const QuantumLayerParams& params);

/// Exact gradient by the two-term shift rule,
/// df/dtheta = [f(theta + pi/2) - f(theta - pi/2)] / 2, for every input and weight.
VqcGradient vqc_parameter_shift_grad(std::span<const double> x, const QuantumLayerParams& params);

/// Row-wise vqc_forward over a row-major B x n_qubits matrix.
std::vector<double> vqc_batched_forward(std::span<const double> x, std::size_t batch,
                                        const QuantumLayerParams& params);

}  // namespace qmcl
