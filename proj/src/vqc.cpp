#include "qmcl/vqc.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qmcl/errors.hpp"
#include "qmcl/parallel.hpp"

namespace qmcl {

QuantumLayerParams QuantumLayerParams::zeros(int n_qubits, int n_layers) {
  QuantumLayerParams p{n_qubits, n_layers, {}};
  if (n_qubits < 1 || n_qubits > kMaxQubits || n_layers < 1) {
    throw ConfigError("invalid VQC size " + std::to_string(n_qubits) + " qubits x " +
                      std::to_string(n_layers) + " layers");
  }
  p.weights.assign(static_cast<std::size_t>(n_qubits) * n_layers, 0.0);
  return p;
}

void QuantumLayerParams::validate() const {
  if (n_qubits < 1 || n_qubits > kMaxQubits || n_layers < 1) {
    throw ConfigError("invalid VQC size " + std::to_string(n_qubits) + " qubits x " +
                      std::to_string(n_layers) + " layers");
  }
  if (weights.size() != static_cast<std::size_t>(n_qubits) * n_layers) {
    throw ShapeError("VQC weights must have n_layers x n_qubits entries");
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw NumericError("VQC weight is not finite");
  }
}

namespace {

void check_inputs(std::span<const double> x, const QuantumLayerParams& params) {
  params.validate();
  if (x.size() != static_cast<std::size_t>(params.n_qubits)) {
    throw ShapeError("VQC input length " + std::to_string(x.size()) + " != n_qubits " +
                     std::to_string(params.n_qubits));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("VQC input is not finite");
  }
}

// Unchecked evaluation shared by forward and the shift rule.
void run_circuit(std::span<const double> x, const QuantumLayerParams& params,
                 std::span<double> out) {
  const int n = params.n_qubits;
  StateVector state(n);
  for (int i = 0; i < n; ++i) state.apply_ry(i, x[i]);
  for (int l = 0; l < params.n_layers; ++l) {
    if (n > 1) {
      for (int i = 0; i < n; ++i) state.apply_cnot(i, (i + 1) % n);
    }
    for (int i = 0; i < n; ++i) state.apply_ry(i, params.weight(l, i));
  }
  for (int i = 0; i < n; ++i) out[i] = state.expect_z(i);
}

}  // namespace

std::vector<GateOp> vqc_circuit(std::span<const double> x, const QuantumLayerParams& params) {
  check_inputs(x, params);
  const int n = params.n_qubits;
  std::vector<GateOp> ops;
  for (int i = 0; i < n; ++i) ops.push_back(GateOp::ry(i, x[i]));
  for (int l = 0; l < params.n_layers; ++l) {
    if (n > 1) {
      for (int i = 0; i < n; ++i) ops.push_back(GateOp::cnot(i, (i + 1) % n));
    }
    for (int i = 0; i < n; ++i) ops.push_back(GateOp::ry(i, params.weight(l, i)));
  }
  return ops;
}

std::vector<double> vqc_forward(std::span<const double> x, const QuantumLayerParams& params) {
  check_inputs(x, params);
  std::vector<double> out(params.n_qubits);
  run_circuit(x, params, out);
  return out;
}

VqcGradient vqc_parameter_shift_grad(std::span<const double> x,
                                     const QuantumLayerParams& params) {
  check_inputs(x, params);
  constexpr double kShift = std::numbers::pi / 2.0;
  const int n = params.n_qubits;
  const int n_weights = n * params.n_layers;

  VqcGradient g;
  g.n_qubits = n;
  g.n_layers = params.n_layers;
  g.d_inputs.assign(static_cast<std::size_t>(n) * n, 0.0);
  g.d_weights.assign(static_cast<std::size_t>(n_weights) * n, 0.0);

  // Angle k < n is input k; angle n + m is weight m. Every angle drives exactly
  // one RY gate, so the shift rule is exact per angle.
  parallel_for(static_cast<std::size_t>(n + n_weights), [&](std::size_t k) {
    std::vector<double> xs(x.begin(), x.end());
    QuantumLayerParams ps = params;
    double* angle = k < static_cast<std::size_t>(n) ? &xs[k] : &ps.weights[k - n];
    const double base = *angle;
    std::vector<double> plus(n), minus(n);
    *angle = base + kShift;
    run_circuit(xs, ps, plus);
    *angle = base - kShift;
    run_circuit(xs, ps, minus);
    double* dst = k < static_cast<std::size_t>(n) ? &g.d_inputs[k * n]
                                                  : &g.d_weights[(k - n) * n];
    for (int j = 0; j < n; ++j) dst[j] = 0.5 * (plus[j] - minus[j]);
  });
  return g;
}

std::vector<double> vqc_batched_forward(std::span<const double> x, std::size_t batch,
                                        const QuantumLayerParams& params) {
  params.validate();
  const std::size_t n = static_cast<std::size_t>(params.n_qubits);
  if (x.size() != batch * n) {
    throw ShapeError("batched VQC input has " + std::to_string(x.size()) +
                     " entries, expected " + std::to_string(batch * n));
  }
  std::vector<double> out(batch * n);
  for (double v : x) {
    if (!std::isfinite(v)) throw NumericError("VQC input is not finite");
  }
  parallel_for(batch, [&](std::size_t b) {
    run_circuit(x.subspan(b * n, n), params, std::span<double>(out).subspan(b * n, n));
  });
  return out;
}

}  // namespace qmcl
