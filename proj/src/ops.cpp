#include "qmcl/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qmcl/errors.hpp"
#include "qmcl/parallel.hpp"
#include "qmcl/vqc.hpp"

namespace qmcl {

namespace {

void expect_rank(const Tensor& t, std::size_t rank, const char* op, const char* arg) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) +
                     ", got " + shape_string(t.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

}  // namespace

Var linear(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  expect_rank(xv, 2, "linear", "x");
  expect_rank(wv, 2, "linear", "weight");
  expect_rank(bv, 1, "linear", "bias");
  const std::size_t batch = xv.dim(0), in = xv.dim(1), out = wv.dim(1);
  if (wv.dim(0) != in || bv.dim(0) != out) {
    mismatch("linear", "x " + shape_string(xv.shape()) + ", weight " + shape_string(wv.shape()) +
                           ", bias " + shape_string(bv.shape()));
  }
  Tensor y({batch, out});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < out; ++o) y.at(b, o) = bv[o];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xv.at(b, i);
      for (std::size_t o = 0; o < out; ++o) y.at(b, o) += xi * wv.at(i, o);
    }
  }
  return x.tape->record(std::move(y), {x, weight, bias},
                        [=](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    const Tensor& wv = tape.value(weight);
    if (tape.requires_grad(x)) {
      auto dx = tape.grad(x);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < in; ++i) {
          double acc = 0.0;
          for (std::size_t o = 0; o < out; ++o) acc += g[b * out + o] * wv.at(i, o);
          dx[b * in + i] += acc;
        }
    }
    if (tape.requires_grad(weight)) {
      auto dw = tape.grad(weight);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < in; ++i) {
          const double xi = xv.at(b, i);
          for (std::size_t o = 0; o < out; ++o) dw[i * out + o] += xi * g[b * out + o];
        }
    }
    if (tape.requires_grad(bias)) {
      auto db = tape.grad(bias);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out; ++o) db[o] += g[b * out + o];
    }
  });
}

Var conv_spatial(Var x, Var kernel) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  expect_rank(xv, 4, "conv_spatial", "x");
  expect_rank(kv, 4, "conv_spatial", "kernel");
  if (xv.dim(1) != 1) mismatch("conv_spatial", "input must have a single channel");
  const std::size_t batch = xv.dim(0), electrodes = xv.dim(2), samples = xv.dim(3);
  const std::size_t maps = kv.dim(0);
  if (kv.dim(1) != 1 || kv.dim(2) != electrodes || kv.dim(3) != 1) {
    mismatch("conv_spatial", "kernel " + shape_string(kv.shape()) +
                                 " must be [F, 1, E, 1] spanning the electrodes of " +
                                 shape_string(xv.shape()));
  }
  Tensor y({batch, maps, 1, samples});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t f = 0; f < maps; ++f) {
      double* dst = &y[(b * maps + f) * samples];
      for (std::size_t e = 0; e < electrodes; ++e) {
        const double k = kv[f * electrodes + e];
        const double* src = &xv[(b * electrodes + e) * samples];
        for (std::size_t t = 0; t < samples; ++t) dst[t] += k * src[t];
      }
    }
  return x.tape->record(std::move(y), {x, kernel},
                        [=](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    const Tensor& kv = tape.value(kernel);
    const bool want_x = tape.requires_grad(x);
    const bool want_k = tape.requires_grad(kernel);
    std::span<double> dx = want_x ? tape.grad(x) : std::span<double>{};
    std::span<double> dk = want_k ? tape.grad(kernel) : std::span<double>{};
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t f = 0; f < maps; ++f) {
        const double* gy = &g[(b * maps + f) * samples];
        for (std::size_t e = 0; e < electrodes; ++e) {
          const std::size_t row = (b * electrodes + e) * samples;
          if (want_k) {
            double acc = 0.0;
            for (std::size_t t = 0; t < samples; ++t) acc += gy[t] * xv[row + t];
            dk[f * electrodes + e] += acc;
          }
          if (want_x) {
            const double k = kv[f * electrodes + e];
            for (std::size_t t = 0; t < samples; ++t) dx[row + t] += k * gy[t];
          }
        }
      }
  });
}

Var conv_temporal(Var x, Var kernel, std::size_t stride) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  expect_rank(xv, 4, "conv_temporal", "x");
  expect_rank(kv, 4, "conv_temporal", "kernel");
  if (stride == 0) throw ConfigError("conv_temporal: stride must be positive");
  const std::size_t batch = xv.dim(0), in_maps = xv.dim(1), samples = xv.dim(3);
  const std::size_t out_maps = kv.dim(0), width = kv.dim(3);
  if (xv.dim(2) != 1) mismatch("conv_temporal", "input height must be 1");
  if (kv.dim(1) != in_maps || kv.dim(2) != 1) {
    mismatch("conv_temporal", "kernel " + shape_string(kv.shape()) + " incompatible with input " +
                                  shape_string(xv.shape()));
  }
  if (width > samples) {
    mismatch("conv_temporal", "kernel width " + std::to_string(width) + " exceeds " +
                                  std::to_string(samples) + " samples");
  }
  const std::size_t out_len = (samples - width) / stride + 1;
  Tensor y({batch, out_maps, 1, out_len});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_maps; ++o) {
      double* dst = &y[(b * out_maps + o) * out_len];
      for (std::size_t f = 0; f < in_maps; ++f) {
        const double* src = &xv[(b * in_maps + f) * samples];
        const double* k = &kv[(o * in_maps + f) * width];
        for (std::size_t t = 0; t < out_len; ++t) {
          double acc = 0.0;
          for (std::size_t j = 0; j < width; ++j) acc += k[j] * src[t * stride + j];
          dst[t] += acc;
        }
      }
    }
  return x.tape->record(std::move(y), {x, kernel},
                        [=](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    const Tensor& kv = tape.value(kernel);
    const bool want_x = tape.requires_grad(x);
    const bool want_k = tape.requires_grad(kernel);
    std::span<double> dx = want_x ? tape.grad(x) : std::span<double>{};
    std::span<double> dk = want_k ? tape.grad(kernel) : std::span<double>{};
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < out_maps; ++o) {
        const double* gy = &g[(b * out_maps + o) * out_len];
        for (std::size_t f = 0; f < in_maps; ++f) {
          const std::size_t src = (b * in_maps + f) * samples;
          const std::size_t kb = (o * in_maps + f) * width;
          for (std::size_t t = 0; t < out_len; ++t) {
            for (std::size_t j = 0; j < width; ++j) {
              if (want_k) dk[kb + j] += gy[t] * xv[src + t * stride + j];
              if (want_x) dx[src + t * stride + j] += gy[t] * kv[kb + j];
            }
          }
        }
      }
  });
}

BatchNormStats BatchNormStats::for_channels(std::size_t channels) {
  return BatchNormStats{Tensor({channels}, 0.0), Tensor({channels}, 1.0)};
}

Var batch_norm(Var x, Var gamma, Var beta, BatchNormStats& stats, BatchNormMode mode) {
  const Tensor& xv = x.value();
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  if (xv.rank() < 2) mismatch("batch_norm", "input must be at least [B, C]");
  const std::size_t batch = xv.dim(0), channels = xv.dim(1);
  const std::size_t inner = xv.numel() / (batch * channels);
  if (gv.shape() != Shape{channels} || bv.shape() != Shape{channels} ||
      stats.running_mean.shape() != Shape{channels} ||
      stats.running_var.shape() != Shape{channels}) {
    mismatch("batch_norm", "affine/statistics tensors must have shape [" +
                               std::to_string(channels) + "]");
  }
  const std::size_t count = batch * inner;
  if (mode == BatchNormMode::Train && batch < 2) {
    throw ConfigError("batch_norm: train mode needs a batch of at least 2");
  }
  auto index = [=](std::size_t b, std::size_t c, std::size_t k) {
    return (b * channels + c) * inner + k;
  };

  // xhat and inverse std are kept for the backward pass.
  Tensor xhat(xv.shape());
  std::vector<double> inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == BatchNormMode::Train) {
      double sum = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t k = 0; k < inner; ++k) sum += xv[index(b, c, k)];
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t k = 0; k < inner; ++k) {
          const double d = xv[index(b, c, k)] - mean;
          sq += d * d;
        }
      var = sq / static_cast<double>(count);
      const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
      stats.running_mean[c] = (1.0 - stats.momentum) * stats.running_mean[c] + stats.momentum * mean;
      stats.running_var[c] = (1.0 - stats.momentum) * stats.running_var[c] + stats.momentum * unbiased;
    } else {
      mean = stats.running_mean[c];
      var = stats.running_var[c];
    }
    inv_std[c] = 1.0 / std::sqrt(var + stats.eps);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t k = 0; k < inner; ++k) {
        const std::size_t i = index(b, c, k);
        xhat[i] = (xv[i] - mean) * inv_std[c];
      }
  }
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const std::size_t c = (i / inner) % channels;
    y[i] = gv[c] * xhat[i] + bv[c];
  }
  const bool train = mode == BatchNormMode::Train;
  return x.tape->record(std::move(y), {x, gamma, beta},
                        [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                            Tape& tape, std::span<const double> g) {
    const Tensor& gv = tape.value(gamma);
    if (tape.requires_grad(gamma) || tape.requires_grad(beta)) {
      std::vector<double> dgamma(channels, 0.0), dbeta(channels, 0.0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t c = (i / inner) % channels;
        dgamma[c] += g[i] * xhat[i];
        dbeta[c] += g[i];
      }
      if (tape.requires_grad(gamma)) {
        auto d = tape.grad(gamma);
        for (std::size_t c = 0; c < channels; ++c) d[c] += dgamma[c];
      }
      if (tape.requires_grad(beta)) {
        auto d = tape.grad(beta);
        for (std::size_t c = 0; c < channels; ++c) d[c] += dbeta[c];
      }
    }
    if (!tape.requires_grad(x)) return;
    auto dx = tape.grad(x);
    for (std::size_t c = 0; c < channels; ++c) {
      const double scale = gv[c] * inv_std[c];
      if (!train) {
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t k = 0; k < inner; ++k) dx[index(b, c, k)] += scale * g[index(b, c, k)];
        continue;
      }
      // dx = gamma/sigma * (g - mean(g) - xhat * mean(g * xhat))
      double sum_g = 0.0, sum_gx = 0.0;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t k = 0; k < inner; ++k) {
          const std::size_t i = index(b, c, k);
          sum_g += g[i];
          sum_gx += g[i] * xhat[i];
        }
      const double mean_g = sum_g / static_cast<double>(count);
      const double mean_gx = sum_gx / static_cast<double>(count);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t k = 0; k < inner; ++k) {
          const std::size_t i = index(b, c, k);
          dx[i] += scale * (g[i] - mean_g - xhat[i] * mean_gx);
        }
    }
  });
}

Var elu(Var x, double alpha) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) {
    y[i] = xv[i] > 0.0 ? xv[i] : alpha * std::expm1(xv[i]);
  }
  return x.tape->record(std::move(y), {x}, [=](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    auto dx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      dx[i] += xv[i] > 0.0 ? g[i] : g[i] * alpha * std::exp(xv[i]);
    }
  });
}

Var l2_normalize(Var x) {
  const Tensor& xv = x.value();
  expect_rank(xv, 2, "l2_normalize", "x");
  const std::size_t rows = xv.dim(0), cols = xv.dim(1);
  Tensor y(xv.shape());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sq += xv.at(r, c) * xv.at(r, c);
    const double n = std::sqrt(sq);
    if (!(n >= 1e-12)) {
      throw NumericError("l2_normalize: row " + std::to_string(r) +
                         " has degenerate norm " + std::to_string(n));
    }
    norms[r] = n;
    for (std::size_t c = 0; c < cols; ++c) y.at(r, c) = xv.at(r, c) / n;
  }
  Tensor y_copy = y;
  return x.tape->record(std::move(y), {x},
                        [=, y = std::move(y_copy), norms = std::move(norms)](
                            Tape& tape, std::span<const double> g) {
    auto dx = tape.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += y.at(r, c) * g[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        dx[r * cols + c] += (g[r * cols + c] - y.at(r, c) * dot) / norms[r];
      }
    }
  });
}

Var angle_squash(Var x) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = std::numbers::pi * std::tanh(xv[i]);
  return x.tape->record(std::move(y), {x}, [=](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    auto dx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = std::tanh(xv[i]);
      dx[i] += g[i] * std::numbers::pi * (1.0 - t * t);
    }
  });
}

Var flatten(Var x) {
  const Tensor& xv = x.value();
  const std::size_t batch = xv.dim(0);
  Tensor y = xv.reshaped({batch, xv.numel() / batch});
  return x.tape->record(std::move(y), {x}, [=](Tape& tape, std::span<const double> g) {
    auto dx = tape.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) dx[i] += g[i];
  });
}

Var vqc_layer(Var x, Var weights) {
  const Tensor& xv = x.value();
  const Tensor& wv = weights.value();
  expect_rank(xv, 2, "vqc_layer", "x");
  expect_rank(wv, 2, "vqc_layer", "weights");
  const std::size_t batch = xv.dim(0), n = xv.dim(1);
  if (wv.dim(1) != n) {
    mismatch("vqc_layer", "weights " + shape_string(wv.shape()) + " do not match " +
                              std::to_string(n) + " qubits");
  }
  QuantumLayerParams params{static_cast<int>(n), static_cast<int>(wv.dim(0)),
                            std::vector<double>(wv.data().begin(), wv.data().end())};
  Tensor y({batch, n}, vqc_batched_forward(xv.data(), batch, params));
  return x.tape->record(std::move(y), {x, weights},
                        [=, params = std::move(params)](Tape& tape, std::span<const double> g) {
    const Tensor& xv = tape.value(x);
    std::vector<VqcGradient> rows(batch);
    parallel_for(batch, [&](std::size_t b) {
      rows[b] = vqc_parameter_shift_grad(xv.data().subspan(b * n, n), params);
    });
    if (tape.requires_grad(x)) {
      auto dx = tape.grad(x);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[b * n + j] * rows[b].dx(i, j);
          dx[b * n + i] += acc;
        }
    }
    if (tape.requires_grad(weights)) {
      auto dw = tape.grad(weights);
      const std::size_t layers = static_cast<std::size_t>(params.n_layers);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t l = 0; l < layers; ++l)
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[b * n + j] * rows[b].dw(l, i, j);
            dw[l * n + i] += acc;
          }
    }
  });
}

Var weighted_sum(Var x, const Tensor& weights) {
  const Tensor& xv = x.value();
  if (xv.numel() != weights.numel()) mismatch("weighted_sum", "weights length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.numel(); ++i) acc += xv[i] * weights[i];
  return x.tape->record(Tensor::scalar(acc), {x},
                        [=](Tape& tape, std::span<const double> g) {
    auto dx = tape.grad(x);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[0] * weights[i];
  });
}

}  // namespace qmcl
