#include "qmcl/adam.hpp"

#include <cmath>

#include "qmcl/errors.hpp"

namespace qmcl {

AdamState::AdamState(std::size_t size, AdamOptions opts)
    : options(opts), m(size, 0.0), v(size, 0.0) {}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment lengths differ");
  }
  const AdamOptions& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(o.beta1, t);
  const double bc2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    if (o.weight_decay != 0.0) params[i] -= o.lr * o.weight_decay * params[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
  }
}

}  // namespace qmcl
