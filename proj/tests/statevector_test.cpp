#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qmcl/errors.hpp"
#include "qmcl/statevector.hpp"

namespace {

using qmcl::Complex;
using qmcl::DenseMatrix;
using qmcl::GateOp;
using qmcl::StateVector;

constexpr double kPi = std::numbers::pi;

StateVector basis_state(int n, std::size_t index) {
  std::vector<Complex> amps(std::size_t{1} << n, 0.0);
  amps[index] = 1.0;
  return StateVector::from_amplitudes(n, amps);
}

StateVector random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> amps(std::size_t{1} << n);
  double norm2 = 0.0;
  for (auto& a : amps) {
    a = {g(rng), g(rng)};
    norm2 += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(norm2);
  return StateVector::from_amplitudes(n, amps);
}

std::vector<GateOp> random_sequence(int n, std::size_t length, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-2 * kPi, 2 * kPi);
  std::bernoulli_distribution pick_cnot(n > 1 ? 0.4 : 0.0);
  std::vector<GateOp> ops;
  for (std::size_t k = 0; k < length; ++k) {
    if (pick_cnot(rng)) {
      int c = qubit(rng);
      int t = qubit(rng);
      while (t == c) t = qubit(rng);
      ops.push_back(GateOp::cnot(c, t));
    } else {
      ops.push_back(GateOp::ry(qubit(rng), angle(rng)));
    }
  }
  return ops;
}

double max_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// CNOT exactly as printed, rows/cols in the ket order |control target>.
DenseMatrix printed_cnot() {
  DenseMatrix m{4, 4, std::vector<Complex>(16, 0.0)};
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

// Relabels a two-qubit matrix between the two qubit orderings.
DenseMatrix swap_qubit_order(const DenseMatrix& m) {
  const std::size_t perm[4] = {0, 2, 1, 3};
  DenseMatrix out{4, 4, std::vector<Complex>(16, 0.0)};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) out(perm[r], perm[c]) = m(r, c);
  return out;
}

}  // namespace

TEST(StateVector, ZeroState) {
  StateVector one(1);
  ASSERT_EQ(one.dim(), 2u);
  EXPECT_EQ(one[0], Complex(1.0));
  EXPECT_EQ(one[1], Complex(0.0));

  StateVector two = qmcl::new_zero_state(2);
  ASSERT_EQ(two.dim(), 4u);
  EXPECT_EQ(two[0], Complex(1.0));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(two[i], Complex(0.0));

  EXPECT_EQ(StateVector(16).dim(), 65536u);
}

TEST(StateVector, QubitCountBounds) {
  EXPECT_THROW(StateVector(17), qmcl::ConfigError);
  EXPECT_THROW(StateVector(0), qmcl::ConfigError);
}

TEST(StateVector, FromAmplitudesValidates) {
  EXPECT_THROW(StateVector::from_amplitudes(2, {1.0, 0.0}), qmcl::ShapeError);
  EXPECT_THROW(StateVector::from_amplitudes(1, {1.0, 1.0}), qmcl::NumericError);
}

TEST(ApplyRy, Examples) {
  StateVector s(1);
  s.apply_ry(0, 0.0);
  EXPECT_EQ(s[0], Complex(1.0));

  StateVector flip(1);
  flip.apply_ry(0, kPi);
  EXPECT_NEAR(std::abs(flip[0]), 0.0, 1e-15);
  EXPECT_NEAR(flip[1].real(), 1.0, 1e-15);

  StateVector half(1);
  half.apply_ry(0, kPi / 2);
  EXPECT_NEAR(half[0].real(), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_NEAR(half[1].real(), std::sqrt(2.0) / 2, 1e-15);
}

TEST(ApplyRy, ZeroAngleLeavesRandomStateUnchanged) {
  std::mt19937_64 rng(3);
  StateVector s = random_state(3, rng);
  const std::vector<Complex> before(s.amplitudes().begin(), s.amplitudes().end());
  s.apply_ry(1, 0.0);
  EXPECT_EQ(max_diff(before, s.amplitudes()), 0.0);
}

TEST(ApplyRy, Errors) {
  StateVector s(2);
  EXPECT_THROW(s.apply_ry(2, 0.1), qmcl::IndexError);
  EXPECT_THROW(s.apply_ry(-1, 0.1), qmcl::IndexError);
  EXPECT_THROW(s.apply_ry(0, std::nan("")), qmcl::NumericError);
  EXPECT_THROW(s.apply_ry(0, INFINITY), qmcl::NumericError);
}

TEST(ApplyCnot, Examples) {
  // qubit 0 set, qubit 1 clear is basis index 1 in storage order
  StateVector s = basis_state(2, 1);
  s.apply_cnot(0, 1);
  EXPECT_EQ(s[3], Complex(1.0));
  EXPECT_EQ(s[1], Complex(0.0));

  StateVector z(2);
  z.apply_cnot(0, 1);
  EXPECT_EQ(z[0], Complex(1.0));

  const double r = 1.0 / std::sqrt(2.0);
  StateVector sup = StateVector::from_amplitudes(2, {r, r, 0.0, 0.0});
  sup.apply_cnot(0, 1);

  // Independent route: the printed matrix acting on kets written |q0 q1>.
  const DenseMatrix m = printed_cnot();
  const std::vector<Complex> ket_in = {r, 0.0, r, 0.0};  // |00> + |10>
  const std::vector<Complex> ket_out = m.apply(ket_in);
  // ket |q0 q1> lives at storage index q0 + 2 q1
  const std::vector<Complex> expected = {ket_out[0], ket_out[2], ket_out[1], ket_out[3]};
  EXPECT_LT(max_diff(sup.amplitudes(), expected), 1e-15);
  EXPECT_NEAR(sup[0].real(), r, 1e-15);
  EXPECT_NEAR(sup[3].real(), r, 1e-15);
}

TEST(ApplyCnot, Errors) {
  StateVector s(3);
  EXPECT_THROW(s.apply_cnot(1, 1), qmcl::IndexError);
  EXPECT_THROW(s.apply_cnot(0, 3), qmcl::IndexError);
  EXPECT_THROW(s.apply_cnot(5, 0), qmcl::IndexError);
}

TEST(ExpectZ, Examples) {
  StateVector zero(1);
  EXPECT_DOUBLE_EQ(zero.expect_z(0), 1.0);
  StateVector one = basis_state(1, 1);
  EXPECT_DOUBLE_EQ(one.expect_z(0), -1.0);

  for (double theta : {-3.0, -1.2, 0.0, 0.4, 1.7, 2.9, 6.0}) {
    StateVector s(1);
    s.apply_ry(0, theta);
    EXPECT_NEAR(s.expect_z(0), std::cos(theta), 1e-14) << theta;
  }
  EXPECT_THROW(zero.expect_z(1), qmcl::IndexError);
}

TEST(DenseOracle, Examples) {
  const DenseMatrix id = qmcl::dense_unitary_oracle({}, 1);
  ASSERT_EQ(id.rows, 2u);
  EXPECT_EQ(id(0, 0), Complex(1.0));
  EXPECT_EQ(id(1, 1), Complex(1.0));
  EXPECT_EQ(id(0, 1), Complex(0.0));
  EXPECT_EQ(id(1, 0), Complex(0.0));

  const std::vector<GateOp> seq = {GateOp::ry(0, kPi / 3), GateOp::cnot(0, 1)};
  const DenseMatrix u = qmcl::dense_unitary_oracle(seq, 2);
  StateVector s(2);
  qmcl::apply_gates(s, seq);
  const std::vector<Complex> e0 = {1.0, 0.0, 0.0, 0.0};
  EXPECT_LT(max_diff(u.apply(e0), s.amplitudes()), 1e-15);

  EXPECT_THROW(qmcl::dense_unitary_oracle({}, 7), qmcl::ConfigError);
}

TEST(DenseOracle, PrintedCnotMatrixUnderEitherQubitOrder) {
  const DenseMatrix printed = printed_cnot();
  const std::vector<GateOp> msb_control = {GateOp::cnot(1, 0)};
  const std::vector<GateOp> lsb_control = {GateOp::cnot(0, 1)};
  const DenseMatrix a = qmcl::dense_unitary_oracle(msb_control, 2);
  const DenseMatrix b = qmcl::dense_unitary_oracle(lsb_control, 2);
  const DenseMatrix relabelled = swap_qubit_order(printed);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(a(r, c), printed(r, c)) << r << "," << c;
      EXPECT_EQ(b(r, c), relabelled(r, c)) << r << "," << c;
    }
  }
}

TEST(StateVectorProperty, MatchesDenseOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> length(0, 12);
  for (int n = 1; n <= 4; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto ops = random_sequence(n, length(rng), rng);
      StateVector s(n);
      qmcl::apply_gates(s, ops);
      const DenseMatrix u = qmcl::dense_unitary_oracle(ops, n);
      std::vector<Complex> e0(std::size_t{1} << n, 0.0);
      e0[0] = 1.0;
      ASSERT_LT(max_diff(u.apply(e0), s.amplitudes()), 1e-10) << "n=" << n << " trial=" << trial;
    }
  }
}

TEST(StateVectorProperty, GatesPreserveNorm) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    StateVector s = random_state(n, rng);
    for (const GateOp& op : random_sequence(n, 1, rng)) qmcl::apply_gate(s, op);
    EXPECT_LT(std::abs(s.norm() - 1.0), 1e-12);
  }
}

TEST(StateVectorProperty, ExpectationBounded) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    StateVector s = random_state(n, rng);
    for (int q = 0; q < n; ++q) {
      const double z = s.expect_z(q);
      EXPECT_GE(z, -1.0);
      EXPECT_LE(z, 1.0);
    }
  }
}

TEST(StateVectorProperty, RyPeriodicFourPi) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    StateVector a = random_state(3, rng);
    StateVector b = a;
    const double theta = angle(rng);
    const int q = trial % 3;
    a.apply_ry(q, theta);
    b.apply_ry(q, theta + 4 * kPi);
    EXPECT_LT(max_diff(a.amplitudes(), b.amplitudes()), 1e-10);
  }
}

TEST(StateVectorProperty, CnotIsInvolution) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    StateVector s = random_state(4, rng);
    const std::vector<Complex> before(s.amplitudes().begin(), s.amplitudes().end());
    const int c = trial % 4;
    const int t = (c + 1 + trial % 3) % 4;
    s.apply_cnot(c, t);
    s.apply_cnot(c, t);
    EXPECT_LT(max_diff(before, s.amplitudes()), 1e-12);
  }
}
