#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "qmcl/tensor.hpp"

namespace qmcl {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Per-forward-pass record of operations for reverse-mode differentiation.
/// Nodes are appended in evaluation order, so reverse insertion order is a
/// valid topological order for the backward sweep.
class Tape {
 public:
  /// Called during backward with the node's accumulated output gradient.
  using Backward = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Input that receives no gradient.
  Var constant(Tensor value);

  /// Input bound to caller-owned storage. Gradients accumulate into
  /// param.grad(); the tensor must outlive the tape.
  Var parameter(Tensor& param);

  /// Result of an operation. `backward` runs only if some parent needs a
  /// gradient.
  Var record(Tensor value, std::initializer_list<Var> parents, Backward backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  /// Gradient slot of `v`, allocated zeroed on first access.
  std::span<double> grad(Var v);

  /// Seeds d(root)/d(root) = 1 and sweeps the tape backwards. `root` must be a
  /// single-element tensor.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    Tensor* external = nullptr;
    bool requires_grad = false;
    std::vector<double> grad;
    Backward backward;
  };

  std::vector<Node> nodes_;
};

}  // namespace qmcl
