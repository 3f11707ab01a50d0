#include "qmcl/statevector.hpp"

#include <cmath>
#include <string>

#include "qmcl/errors.hpp"

namespace qmcl {

namespace {

void check_qubit_count(int n_qubits, int max) {
  if (n_qubits < 1 || n_qubits > max) {
    throw ConfigError("qubit count " + std::to_string(n_qubits) + " outside [1, " +
                      std::to_string(max) + "]");
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  check_qubit_count(n_qubits, kMaxQubits);
  amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
  amps_[0] = Complex{1.0, 0.0};
}

StateVector StateVector::from_amplitudes(int n_qubits, std::vector<Complex> amplitudes) {
  StateVector s(n_qubits);
  if (amplitudes.size() != s.dim()) {
    throw ShapeError("expected " + std::to_string(s.dim()) + " amplitudes, got " +
                     std::to_string(amplitudes.size()));
  }
  s.amps_ = std::move(amplitudes);
  const double n = s.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-12) {
    throw NumericError("amplitudes are not normalized (norm " + std::to_string(n) + ")");
  }
  return s;
}

StateVector new_zero_state(int n_qubits) { return StateVector(n_qubits); }

void StateVector::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) {
    throw IndexError("qubit " + std::to_string(qubit) + " out of range for " +
                     std::to_string(n_qubits_) + "-qubit state");
  }
}

void StateVector::apply_ry(int qubit, double angle) {
  check_qubit(qubit);
  if (!std::isfinite(angle)) throw NumericError("RY angle is not finite");
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t n = amps_.size();
  // Visit each (bit clear, bit set) pair once: blocks of 2*stride, lower half
  // holds the bit-clear partners.
  for (std::size_t block = 0; block < n; block += 2 * stride) {
    for (std::size_t i = block; i < block + stride; ++i) {
      const Complex a0 = amps_[i];
      const Complex a1 = amps_[i + stride];
      amps_[i] = c * a0 - s * a1;
      amps_[i + stride] = s * a0 + c * a1;
    }
  }
}

void StateVector::apply_cnot(int control, int target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) {
    throw IndexError("CNOT control and target are both qubit " + std::to_string(control));
  }
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t b = 0; b < amps_.size(); ++b) {
    if ((b & cmask) && !(b & tmask)) std::swap(amps_[b], amps_[b | tmask]);
  }
}

double StateVector::expect_z(int qubit) const {
  check_qubit(qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  double acc = 0.0;
  for (std::size_t b = 0; b < amps_.size(); ++b) {
    const double p = std::norm(amps_[b]);
    acc += (b & mask) ? -p : p;
  }
  return acc;
}

double StateVector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void apply_gate(StateVector& state, const GateOp& op) {
  switch (op.kind) {
    case GateKind::RY:
      state.apply_ry(op.qubit, op.angle);
      break;
    case GateKind::CNOT:
      state.apply_cnot(op.control, op.qubit);
      break;
  }
}

void apply_gates(StateVector& state, std::span<const GateOp> ops) {
  for (const auto& op : ops) apply_gate(state, op);
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m{n, n, std::vector<Complex>(n * n, Complex{0.0, 0.0})};
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
  if (cols != rhs.rows) throw ShapeError("matrix product dimension mismatch");
  DenseMatrix out{rows, rhs.cols, std::vector<Complex>(rows * rhs.cols, Complex{0.0, 0.0})};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      const Complex a = (*this)(r, k);
      if (a == Complex{0.0, 0.0}) continue;
      for (std::size_t c = 0; c < rhs.cols; ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

std::vector<Complex> DenseMatrix::apply(std::span<const Complex> v) const {
  if (v.size() != cols) throw ShapeError("matrix-vector dimension mismatch");
  std::vector<Complex> out(rows, Complex{0.0, 0.0});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r] += (*this)(r, c) * v[c];
  }
  return out;
}

DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out{a.rows * b.rows, a.cols * b.cols,
                  std::vector<Complex>(a.rows * b.rows * a.cols * b.cols)};
  for (std::size_t ar = 0; ar < a.rows; ++ar)
    for (std::size_t ac = 0; ac < a.cols; ++ac)
      for (std::size_t br = 0; br < b.rows; ++br)
        for (std::size_t bc = 0; bc < b.cols; ++bc)
          out(ar * b.rows + br, ac * b.cols + bc) = a(ar, ac) * b(br, bc);
  return out;
}

namespace {

DenseMatrix two_by_two(Complex a, Complex b, Complex c, Complex d) {
  return DenseMatrix{2, 2, {a, b, c, d}};
}

// Full-space operator acting as `local[q]` on each qubit q. Qubit 0 is the
// least significant index bit, so it is the rightmost Kronecker factor.
DenseMatrix expand(const std::vector<DenseMatrix>& local) {
  DenseMatrix out = local.back();
  for (int q = static_cast<int>(local.size()) - 2; q >= 0; --q) out = kron(out, local[q]);
  return out;
}

DenseMatrix full_gate(const GateOp& op, int n_qubits) {
  const DenseMatrix id = DenseMatrix::identity(2);
  auto in_range = [&](int q) { return q >= 0 && q < n_qubits; };
  if (!in_range(op.qubit)) throw IndexError("oracle gate qubit out of range");
  if (op.kind == GateKind::RY) {
    const double c = std::cos(0.5 * op.angle);
    const double s = std::sin(0.5 * op.angle);
    std::vector<DenseMatrix> local(n_qubits, id);
    local[op.qubit] = two_by_two(c, -s, s, c);
    return expand(local);
  }
  if (!in_range(op.control) || op.control == op.qubit) {
    throw IndexError("oracle CNOT control invalid");
  }
  // CNOT = |0><0|_c (x) I + |1><1|_c (x) X_t
  std::vector<DenseMatrix> off(n_qubits, id);
  std::vector<DenseMatrix> on(n_qubits, id);
  off[op.control] = two_by_two(1, 0, 0, 0);
  on[op.control] = two_by_two(0, 0, 0, 1);
  on[op.qubit] = two_by_two(0, 1, 1, 0);
  DenseMatrix a = expand(off);
  const DenseMatrix b = expand(on);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
  return a;
}

}  // namespace

DenseMatrix dense_unitary_oracle(std::span<const GateOp> ops, int n_qubits) {
  check_qubit_count(n_qubits, kMaxOracleQubits);
  DenseMatrix u = DenseMatrix::identity(std::size_t{1} << n_qubits);
  for (const auto& op : ops) u = full_gate(op, n_qubits) * u;
  return u;
}

}  // namespace qmcl
