#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qmcl/encoders.hpp"
#include "qmcl/errors.hpp"
#include "qmcl/gradcheck.hpp"
#include "qmcl/gradcheck_suite.hpp"
#include "qmcl/vqc.hpp"

namespace {

using qmcl::BatchNormMode;
using qmcl::Tape;
using qmcl::Tensor;

qmcl::QstConvConfig tiny_eeg() {
  qmcl::QstConvConfig c;
  c.electrodes = 4;
  c.samples = 32;
  c.spatial_maps = 3;
  c.temporal_maps = 2;
  c.temporal_kernel = 8;
  c.embed_dim = 5;
  c.n_qubits = 2;
  c.n_layers = 2;
  return c;
}

qmcl::ImageHeadConfig tiny_image() {
  qmcl::ImageHeadConfig c;
  c.image_dim = 6;
  c.embed_dim = 5;
  c.n_qubits = 2;
  c.n_layers = 2;
  return c;
}

Tensor randn(qmcl::Shape shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> d;
  for (double& v : t.data()) v = d(rng);
  return t;
}

Tensor run_eeg(const Tensor& x, qmcl::QstConvParams& p, const qmcl::QstConvConfig& c,
               BatchNormMode mode) {
  Tape tape;
  return qmcl::qstconv_forward(tape, tape.constant(x), p, c, mode).value();
}

Tensor run_image(const Tensor& x, qmcl::ImageHeadParams& p, const qmcl::ImageHeadConfig& c) {
  Tape tape;
  return qmcl::image_head_forward(tape, tape.constant(x), p, c).value();
}

void expect_unit_rows(const Tensor& y) {
  for (std::size_t r = 0; r < y.dim(0); ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < y.dim(1); ++c) sq += y.at(r, c) * y.at(r, c);
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12) << "row " << r;
  }
}

// normalize(W_out^T f + b_out) where f is the VQC output on zero angles.
std::vector<double> zero_input_row(const Tensor& vqc_weights, const Tensor& w_out,
                                   const Tensor& b_out) {
  const std::size_t n = w_out.dim(0), d = w_out.dim(1);
  qmcl::QuantumLayerParams q{static_cast<int>(n), static_cast<int>(vqc_weights.dim(0)),
                             {vqc_weights.data().begin(), vqc_weights.data().end()}};
  const auto f = qmcl::vqc_forward(std::vector<double>(n, 0.0), q);
  std::vector<double> row(d);
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    row[j] = b_out[j];
    for (std::size_t i = 0; i < n; ++i) row[j] += f[i] * w_out.at(i, j);
    sq += row[j] * row[j];
  }
  for (double& v : row) v /= std::sqrt(sq);
  return row;
}

}  // namespace

TEST(QstConv, ZeroInputGivesRepeatedKnownRow) {
  const auto c = tiny_eeg();
  std::mt19937_64 rng(1);
  auto p = qmcl::QstConvParams::init(c, rng);
  const Tensor x({3, 1, c.electrodes, c.samples}, 0.0);
  const auto want = zero_input_row(p.vqc_weights, p.proj_out_weight, p.proj_out_bias);
  for (auto mode : {BatchNormMode::Eval, BatchNormMode::Train}) {
    const Tensor y = run_eeg(x, p, c, mode);
    ASSERT_EQ(y.shape(), (qmcl::Shape{3, c.embed_dim}));
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t j = 0; j < c.embed_dim; ++j) EXPECT_NEAR(y.at(r, j), want[j], 1e-12);
  }

  // With zero VQC angles the circuit emits all +1.
  p.vqc_weights = Tensor(p.vqc_weights.shape(), 0.0);
  const Tensor y = run_eeg(x, p, c, BatchNormMode::Eval);
  std::vector<double> ones_row(c.embed_dim);
  double sq = 0.0;
  for (std::size_t j = 0; j < c.embed_dim; ++j) {
    ones_row[j] = p.proj_out_weight.at(0, j) + p.proj_out_weight.at(1, j);
    sq += ones_row[j] * ones_row[j];
  }
  for (std::size_t j = 0; j < c.embed_dim; ++j)
    EXPECT_NEAR(y.at(2, j), ones_row[j] / std::sqrt(sq), 1e-12);
}

TEST(ImageHead, ZeroInputMatchesEegZeroCase) {
  const auto ce = tiny_eeg();
  const auto ci = tiny_image();
  std::mt19937_64 rng(2);
  auto pe = qmcl::QstConvParams::init(ce, rng);
  auto pi = qmcl::ImageHeadParams::init(ci, rng);
  pi.vqc_weights = pe.vqc_weights;
  pi.proj_out_weight = pe.proj_out_weight;
  const Tensor ye = run_eeg(Tensor({2, 1, ce.electrodes, ce.samples}, 0.0), pe, ce, BatchNormMode::Eval);
  const Tensor yi = run_image(Tensor({2, ci.image_dim}, 0.0), pi, ci);
  for (std::size_t k = 0; k < ye.numel(); ++k) EXPECT_NEAR(ye[k], yi[k], 1e-12);
}

TEST(Encoders, OutputsUnitNorm) {
  const auto ce = tiny_eeg();
  const auto ci = tiny_image();
  std::mt19937_64 rng(3);
  auto pe = qmcl::QstConvParams::init(ce, rng);
  auto pi = qmcl::ImageHeadParams::init(ci, rng);
  for (int draw = 0; draw < 5; ++draw) {
    expect_unit_rows(run_eeg(randn({4, 1, ce.electrodes, ce.samples}, rng), pe, ce, BatchNormMode::Train));
    expect_unit_rows(run_eeg(randn({4, 1, ce.electrodes, ce.samples}, rng), pe, ce, BatchNormMode::Eval));
    expect_unit_rows(run_image(randn({4, ci.image_dim}, rng), pi, ci));
  }
}

TEST(Encoders, BatchPermutationEquivariantInEval) {
  const auto ce = tiny_eeg();
  const auto ci = tiny_image();
  std::mt19937_64 rng(4);
  auto pe = qmcl::QstConvParams::init(ce, rng);
  auto pi = qmcl::ImageHeadParams::init(ci, rng);
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};

  const Tensor x = randn({5, 1, ce.electrodes, ce.samples}, rng);
  const std::size_t stride = ce.electrodes * ce.samples;
  Tensor xp(x.shape());
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t k = 0; k < stride; ++k) xp[r * stride + k] = x[perm[r] * stride + k];
  const Tensor y = run_eeg(x, pe, ce, BatchNormMode::Eval);
  const Tensor yp = run_eeg(xp, pe, ce, BatchNormMode::Eval);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t j = 0; j < ce.embed_dim; ++j) EXPECT_EQ(yp.at(r, j), y.at(perm[r], j));

  const Tensor e = randn({5, ci.image_dim}, rng);
  Tensor ep(e.shape());
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t k = 0; k < ci.image_dim; ++k) ep.at(r, k) = e.at(perm[r], k);
  const Tensor z = run_image(e, pi, ci);
  const Tensor zp = run_image(ep, pi, ci);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t j = 0; j < ci.embed_dim; ++j) EXPECT_EQ(zp.at(r, j), z.at(perm[r], j));
}

TEST(Encoders, ShapeErrors) {
  const auto ce = tiny_eeg();
  std::mt19937_64 rng(5);
  auto pe = qmcl::QstConvParams::init(ce, rng);
  EXPECT_THROW(run_eeg(Tensor({2, 1, ce.electrodes + 1, ce.samples}, 1.0), pe, ce, BatchNormMode::Eval),
               qmcl::ShapeError);
  auto ci = tiny_image();
  auto pi = qmcl::ImageHeadParams::init(ci, rng);
  EXPECT_THROW(run_image(Tensor({2, ci.image_dim + 2}, 1.0), pi, ci), qmcl::ShapeError);

  auto bad = ce;
  bad.temporal_kernel = bad.samples + 1;
  EXPECT_THROW(bad.validate(), qmcl::ConfigError);
  bad = ce;
  bad.n_qubits = 17;
  EXPECT_THROW(bad.validate(), qmcl::ConfigError);
}

TEST(Encoders, DegenerateEmbeddingIsNumericError) {
  auto ci = tiny_image();
  std::mt19937_64 rng(6);
  auto pi = qmcl::ImageHeadParams::init(ci, rng);
  pi.proj_out_weight = Tensor(pi.proj_out_weight.shape(), 0.0);
  EXPECT_THROW(run_image(Tensor({1, ci.image_dim}, 1.0), pi, ci), qmcl::NumericError);
}

TEST(QstConv, EndToEndGradcheck) {
  const auto c = tiny_eeg();
  std::mt19937_64 rng(7);
  auto p = qmcl::QstConvParams::init(c, rng);
  const Tensor x = randn({3, 1, c.electrodes, c.samples}, rng);
  const Tensor probe = randn({3, c.embed_dim}, rng);
  std::vector<Tensor*> wrt;
  std::size_t total = 0;
  for (auto& np : p.trainable()) {
    wrt.push_back(np.tensor);
    total += np.tensor->numel();
  }
  for (auto mode : {BatchNormMode::Train, BatchNormMode::Eval}) {
    const auto r = qmcl::check_gradients("qstconv", wrt, [&](Tape& tape) {
      return qmcl::weighted_sum(qmcl::qstconv_forward(tape, tape.constant(x), p, c, mode), probe);
    }, qmcl::kPipelineTolerance);
    EXPECT_TRUE(r.pass) << "max scaled dev " << r.max_scaled_dev;
    EXPECT_EQ(r.entries, total);
  }
}

TEST(ImageHead, EndToEndGradcheck) {
  const auto c = tiny_image();
  std::mt19937_64 rng(8);
  auto p = qmcl::ImageHeadParams::init(c, rng);
  const Tensor x = randn({4, c.image_dim}, rng);
  const Tensor probe = randn({4, c.embed_dim}, rng);
  std::vector<Tensor*> wrt;
  for (auto& np : p.trainable()) wrt.push_back(np.tensor);
  const auto r = qmcl::check_gradients("image_head", wrt, [&](Tape& tape) {
    return qmcl::weighted_sum(qmcl::image_head_forward(tape, tape.constant(x), p, c), probe);
  }, qmcl::kPipelineTolerance);
  EXPECT_TRUE(r.pass) << "max scaled dev " << r.max_scaled_dev;
}

TEST(Encoders, InitRanges) {
  const auto c = tiny_eeg();
  std::mt19937_64 rng(9);
  auto p = qmcl::QstConvParams::init(c, rng);
  for (double w : p.vqc_weights.data()) {
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, 2 * std::numbers::pi);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(c.electrodes));
  for (double w : p.spatial_kernel.data()) EXPECT_LE(std::abs(w), bound);
  for (double b : p.proj_in_bias.data()) EXPECT_EQ(b, 0.0);
  EXPECT_EQ(p.trainable().size(), 11u);
  EXPECT_EQ(p.buffers().size(), 4u);
}
