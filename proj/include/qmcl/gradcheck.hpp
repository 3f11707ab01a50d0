#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qmcl/tape.hpp"
#include "qmcl/tensor.hpp"

namespace qmcl {

/// Outcome of comparing tape gradients against central finite differences.
/// Deviation per entry is |analytic - numeric| / max(1, |numeric|): absolute
/// for small gradients, relative for large ones.
struct GradCheckResult {
  std::string name;
  double max_abs_dev = 0.0;
  double max_scaled_dev = 0.0;
  double tolerance = 0.0;
  std::size_t entries = 0;
  bool pass = false;
};

/// Builds a scalar graph on the given tape. Must bind every tensor of
/// interest with Tape::parameter so its gradient lands in Tensor::grad().
using ScalarGraph = std::function<Var(Tape&)>;

/// Runs `graph` once with backward to get analytic gradients for `wrt`, then
/// perturbs each entry by +/- h and re-evaluates forward only.
GradCheckResult check_gradients(std::string name, std::span<Tensor* const> wrt,
                                const ScalarGraph& graph, double tolerance, double h = 1e-5);

}  // namespace qmcl
