#include "qmcl/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "qmcl/errors.hpp"

namespace qmcl {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_numel(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

void Tensor::ensure_grad() {
  if (grad_.size() != data_.size()) grad_.assign(data_.size(), 0.0);
}

void Tensor::zero_grad() {
  grad_.assign(data_.size(), 0.0);
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

void Tensor::check_finite(const std::string& where) const {
  if (std::any_of(data_.begin(), data_.end(), [](double v) { return !std::isfinite(v); })) {
    throw NumericError("non-finite value in " + where);
  }
}

}  // namespace qmcl
