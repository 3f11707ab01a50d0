#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qmcl {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 16;

/// Pure n-qubit state. Amplitudes are indexed by the basis-state integer with
/// qubit 0 as the least significant bit, so amplitude b belongs to the ket
/// whose qubit q is (b >> q) & 1.
class StateVector {
 public:
  /// |0...0> on n_qubits qubits; throws ConfigError outside [1, kMaxQubits].
  explicit StateVector(int n_qubits);

  /// Wraps a caller-supplied amplitude array. The length must be 2^n and the
  /// norm must be 1 within 1e-12.
  static StateVector from_amplitudes(int n_qubits, std::vector<Complex> amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  const Complex& operator[](std::size_t basis) const { return amps_[basis]; }

  /// RY(angle) = exp(-i angle/2 sigma_y) on `qubit`.
  void apply_ry(int qubit, double angle);

  /// Flips `target` on every basis state whose `control` bit is set.
  void apply_cnot(int control, int target);

  /// <sigma_z> on `qubit`: sum_b |amp_b|^2 * (+1 if bit clear else -1).
  double expect_z(int qubit) const;

  double norm() const;

 private:
  void check_qubit(int qubit) const;

  int n_qubits_;
  std::vector<Complex> amps_;
};

StateVector new_zero_state(int n_qubits);

enum class GateKind { RY, CNOT };

struct GateOp {
  GateKind kind = GateKind::RY;
  int qubit = 0;  // target qubit for both kinds
  double angle = 0.0;
  int control = -1;

  static GateOp ry(int qubit, double angle) { return {GateKind::RY, qubit, angle, -1}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, target, 0.0, control}; }
};

void apply_gate(StateVector& state, const GateOp& op);
void apply_gates(StateVector& state, std::span<const GateOp> ops);

/// Row-major dense complex matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> data;

  Complex& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  static DenseMatrix identity(std::size_t n);
  DenseMatrix operator*(const DenseMatrix& rhs) const;
  std::vector<Complex> apply(std::span<const Complex> v) const;
};

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b);

inline constexpr int kMaxOracleQubits = 6;

/// Test oracle: the product of full-space gate matrices built by explicit
/// Kronecker expansion (no bit arithmetic). Later gates multiply on the left.
/// Throws ConfigError for n_qubits > kMaxOracleQubits.
DenseMatrix dense_unitary_oracle(std::span<const GateOp> ops, int n_qubits);

}  // namespace qmcl
