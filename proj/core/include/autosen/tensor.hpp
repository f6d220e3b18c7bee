#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace autosen {

/// Dense row-major array of doubles with an explicit shape.
///
/// The single numeric container used across the project: CSI matrices are
/// rank-2 (time x channel), network activations are rank-2 (batch x features)
/// or rank-4 (batch x channel x height x width).
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* raw() noexcept { return data_.data(); }
  const double* raw() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Bounds-checked element access; throws ShapeError on a bad index or rank.
  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j, std::size_t k);
  double at(std::size_t i, std::size_t j, std::size_t k) const;
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l);
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

  /// Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  /// Contiguous slice of the leading axis: rows [first, first + count).
  Tensor slice_leading(std::size_t first, std::size_t count) const;

  friend bool operator==(const Tensor& a, const Tensor& b) noexcept {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

std::size_t element_count(const Tensor::Shape& shape) noexcept;
std::string shape_string(const Tensor::Shape& shape);

/// Sum of element-wise products; sequential summation order.
double dot(const Tensor& a, const Tensor& b);

/// Bitwise equality of the underlying doubles (distinguishes -0.0 and NaN payloads).
bool bit_identical(const Tensor& a, const Tensor& b) noexcept;

/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor* const> items);

}  // namespace autosen
