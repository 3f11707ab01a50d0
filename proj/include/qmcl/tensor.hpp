#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qmcl {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major double tensor with an optional gradient slot of the same
/// length. The gradient slot is empty until ensure_grad() is called.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t numel() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }

  // Rank-2 row-major access.
  double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  bool has_grad() const noexcept { return !grad_.empty(); }
  std::span<double> grad() noexcept { return grad_; }
  std::span<const double> grad() const noexcept { return grad_; }
  /// Allocates a zeroed gradient slot if none exists.
  void ensure_grad();
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  /// Same data, new shape with identical element count.
  Tensor reshaped(Shape shape) const;

  /// Throws NumericError naming `where` if any entry is NaN or infinite.
  void check_finite(const std::string& where) const;

 private:
  Shape shape_;
  std::vector<double> data_;
  std::vector<double> grad_;
};

}  // namespace qmcl
