#include "qmcl/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmcl/errors.hpp"
#include "qmcl/statevector.hpp"

namespace qmcl {

namespace {

void check_qubits(int n_qubits, int n_layers) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("n_qubits must be in [1, 16], got " + std::to_string(n_qubits));
  }
  if (n_layers < 1) throw ConfigError("n_layers must be positive");
}

Tensor uniform(Shape shape, double lo, double hi, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

Tensor fan_in_uniform(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return uniform(std::move(shape), -bound, bound, rng);
}

void check_input(const Tensor& t, const Shape& expected_tail, const char* what) {
  if (t.rank() != expected_tail.size() + 1 ||
      !std::equal(expected_tail.begin(), expected_tail.end(), t.shape().begin() + 1)) {
    Shape want{0};
    want.insert(want.end(), expected_tail.begin(), expected_tail.end());
    std::string w = shape_string(want);
    w.replace(1, 1, "B");
    throw ShapeError(std::string(what) + " input must be " + w + ", got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

void QstConvConfig::validate() const {
  if (electrodes == 0 || samples == 0 || spatial_maps == 0 || temporal_maps == 0 ||
      temporal_kernel == 0 || embed_dim == 0) {
    throw ConfigError("QSTConv sizes must all be positive");
  }
  if (temporal_kernel > samples) {
    throw ConfigError("temporal kernel " + std::to_string(temporal_kernel) + " exceeds " +
                      std::to_string(samples) + " samples");
  }
  check_qubits(n_qubits, n_layers);
}

void ImageHeadConfig::validate() const {
  if (image_dim == 0 || embed_dim == 0) throw ConfigError("image head sizes must be positive");
  check_qubits(n_qubits, n_layers);
}

QstConvParams QstConvParams::init(const QstConvConfig& c, std::mt19937_64& rng) {
  c.validate();
  const std::size_t n = static_cast<std::size_t>(c.n_qubits);
  const std::size_t layers = static_cast<std::size_t>(c.n_layers);
  QstConvParams p;
  p.spatial_kernel = fan_in_uniform({c.spatial_maps, 1, c.electrodes, 1}, c.electrodes, rng);
  p.bn1_gamma = Tensor({c.spatial_maps}, 1.0);
  p.bn1_beta = Tensor({c.spatial_maps}, 0.0);
  p.bn1 = BatchNormStats::for_channels(c.spatial_maps);
  p.temporal_kernel = fan_in_uniform({c.temporal_maps, c.spatial_maps, 1, c.temporal_kernel},
                                     c.spatial_maps * c.temporal_kernel, rng);
  p.bn2_gamma = Tensor({c.temporal_maps}, 1.0);
  p.bn2_beta = Tensor({c.temporal_maps}, 0.0);
  p.bn2 = BatchNormStats::for_channels(c.temporal_maps);
  p.proj_in_weight = fan_in_uniform({c.flat_features(), n}, c.flat_features(), rng);
  p.proj_in_bias = Tensor({n}, 0.0);
  p.vqc_weights = uniform({layers, n}, 0.0, 2.0 * std::numbers::pi, rng);
  p.proj_out_weight = fan_in_uniform({n, c.embed_dim}, n, rng);
  p.proj_out_bias = Tensor({c.embed_dim}, 0.0);
  return p;
}

std::vector<NamedParam> QstConvParams::trainable() {
  return {{"spatial_kernel", &spatial_kernel},   {"bn1_gamma", &bn1_gamma},
          {"bn1_beta", &bn1_beta},               {"temporal_kernel", &temporal_kernel},
          {"bn2_gamma", &bn2_gamma},             {"bn2_beta", &bn2_beta},
          {"proj_in_weight", &proj_in_weight},   {"proj_in_bias", &proj_in_bias},
          {"vqc_weights", &vqc_weights},         {"proj_out_weight", &proj_out_weight},
          {"proj_out_bias", &proj_out_bias}};
}

std::vector<NamedParam> QstConvParams::buffers() {
  return {{"bn1_running_mean", &bn1.running_mean},
          {"bn1_running_var", &bn1.running_var},
          {"bn2_running_mean", &bn2.running_mean},
          {"bn2_running_var", &bn2.running_var}};
}

ImageHeadParams ImageHeadParams::init(const ImageHeadConfig& c, std::mt19937_64& rng) {
  c.validate();
  const std::size_t n = static_cast<std::size_t>(c.n_qubits);
  ImageHeadParams p;
  p.proj_in_weight = fan_in_uniform({c.image_dim, n}, c.image_dim, rng);
  p.proj_in_bias = Tensor({n}, 0.0);
  p.vqc_weights = uniform({static_cast<std::size_t>(c.n_layers), n}, 0.0,
                          2.0 * std::numbers::pi, rng);
  p.proj_out_weight = fan_in_uniform({n, c.embed_dim}, n, rng);
  p.proj_out_bias = Tensor({c.embed_dim}, 0.0);
  return p;
}

std::vector<NamedParam> ImageHeadParams::trainable() {
  return {{"proj_in_weight", &proj_in_weight}, {"proj_in_bias", &proj_in_bias},
          {"vqc_weights", &vqc_weights},       {"proj_out_weight", &proj_out_weight},
          {"proj_out_bias", &proj_out_bias}};
}

Var qstconv_forward(Tape& tape, Var eeg, QstConvParams& p, const QstConvConfig& c,
                    BatchNormMode mode) {
  check_input(eeg.value(), {1, c.electrodes, c.samples}, "QSTConv");
  Var h = conv_spatial(eeg, tape.parameter(p.spatial_kernel));
  h = elu(batch_norm(h, tape.parameter(p.bn1_gamma), tape.parameter(p.bn1_beta), p.bn1, mode));
  h = conv_temporal(h, tape.parameter(p.temporal_kernel));
  h = elu(batch_norm(h, tape.parameter(p.bn2_gamma), tape.parameter(p.bn2_beta), p.bn2, mode));
  h = flatten(h);
  h = linear(h, tape.parameter(p.proj_in_weight), tape.parameter(p.proj_in_bias));
  h = vqc_layer(angle_squash(h), tape.parameter(p.vqc_weights));
  h = linear(h, tape.parameter(p.proj_out_weight), tape.parameter(p.proj_out_bias));
  return l2_normalize(h);
}

Var image_head_forward(Tape& tape, Var image_embedding, ImageHeadParams& p,
                       const ImageHeadConfig& c) {
  check_input(image_embedding.value(), {c.image_dim}, "image head");
  Var h = linear(image_embedding, tape.parameter(p.proj_in_weight), tape.parameter(p.proj_in_bias));
  h = vqc_layer(angle_squash(h), tape.parameter(p.vqc_weights));
  h = linear(h, tape.parameter(p.proj_out_weight), tape.parameter(p.proj_out_bias));
  return l2_normalize(h);
}

}  // namespace qmcl
