#include "qmcl/tape.hpp"

#include "qmcl/errors.hpp"

namespace qmcl {

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  param.ensure_grad();
  Node n;
  n.external = &param;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, Backward backward) {
  Node n;
  n.owned = std::move(value);
  for (const Var& p : parents) {
    if (p.tape != this) throw Error("operation mixes variables from different tapes");
    n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external ? *n.external : n.owned;
}

std::span<double> Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.external) return n.external->grad();
  if (n.grad.empty()) n.grad.assign(n.owned.numel(), 0.0);
  return n.grad;
}

void Tape::backward(Var root) {
  if (value(root).numel() != 1) {
    throw ShapeError("backward root must be a scalar, got shape " +
                     shape_string(value(root).shape()));
  }
  if (!nodes_[root.id].requires_grad) return;
  grad(root)[0] += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    // The callback may touch other nodes' grads but never this node's, so
    // handing it a span into n.grad is safe.
    n.backward(*this, n.grad);
  }
}

}  // namespace qmcl
