#include "autosen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "autosen/error.hpp"

namespace autosen {

std::size_t element_count(const Tensor::Shape& shape) noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Tensor::Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError(std::to_string(index.size()) + " indices for shape " + shape_string(shape_));
  }
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) {
      throw ShapeError("index " + std::to_string(i) + " out of range on axis " +
                       std::to_string(axis) + " of shape " + shape_string(shape_));
    }
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

double& Tensor::at(std::size_t i, std::size_t j) { return data_[offset({i, j})]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data_[offset({i, j})]; }

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return data_[offset({i, j, k})];
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return data_[offset({i, j, k})];
}

double& Tensor::at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  return data_[offset({i, j, k, l})];
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
  return data_[offset({i, j, k, l})];
}

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (element_count(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::slice_leading(std::size_t first, std::size_t count) const {
  if (shape_.empty() || first + count > shape_[0]) {
    throw ShapeError("leading slice out of range for shape " + shape_string(shape_));
  }
  const std::size_t stride = shape_[0] == 0 ? 0 : data_.size() / shape_[0];
  Shape shape = shape_;
  shape[0] = count;
  std::vector<double> data(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                           data_.begin() + static_cast<std::ptrdiff_t>((first + count) * stride));
  return Tensor(std::move(shape), std::move(data));
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: sizes differ " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

bool bit_identical(const Tensor& a, const Tensor& b) noexcept {
  return a.shape() == b.shape() &&
         (a.size() == 0 || std::memcmp(a.raw(), b.raw(), a.size() * sizeof(double)) == 0);
}

Tensor stack(std::span<const Tensor* const> items) {
  if (items.empty()) throw InvalidInput("stack: no tensors");
  const auto& first = items.front()->shape();
  Tensor::Shape shape;
  shape.reserve(first.size() + 1);
  shape.push_back(items.size());
  shape.insert(shape.end(), first.begin(), first.end());
  Tensor out(std::move(shape));
  const std::size_t stride = element_count(first);
  for (std::size_t n = 0; n < items.size(); ++n) {
    if (items[n]->shape() != first) {
      throw ShapeError("stack: shape " + shape_string(items[n]->shape()) + " differs from " +
                       shape_string(first));
    }
    std::copy(items[n]->data().begin(), items[n]->data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(n * stride));
  }
  return out;
}

}  // namespace autosen
