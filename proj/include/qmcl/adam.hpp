#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qmcl {

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled (AdamW); 0 gives plain Adam
};

/// Moments and step count for one parameter array.
struct AdamState {
  AdamState() = default;
  AdamState(std::size_t size, AdamOptions opts);

  AdamOptions options;
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update in place:
///   p <- p - lr * wd * p
///   p <- p - lr * mhat / (sqrt(vhat) + eps)
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace qmcl
