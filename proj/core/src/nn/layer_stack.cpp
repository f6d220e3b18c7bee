#include "autosen/nn/layer_stack.hpp"

#include <cstring>
#include <string>

#include "autosen/error.hpp"

namespace autosen::nn {

LayerStack::LayerStack(const LayerStack& other) : has_forward_(false) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) {
    auto copy = l->clone();
    copy->clear_cache();
    layers_.push_back(std::move(copy));
  }
}

LayerStack& LayerStack::operator=(const LayerStack& other) {
  if (this != &other) {
    LayerStack copy(other);
    *this = std::move(copy);
  }
  return *this;
}

LayerStack& LayerStack::add(std::unique_ptr<Layer> layer) {
  if (!layer) throw InvalidInput("LayerStack::add: null layer");
  layers_.push_back(std::move(layer));
  has_forward_ = false;
  return *this;
}

Tensor LayerStack::forward(const Tensor& batch) {
  Tensor x = batch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i]->forward(x);
    if (!x.all_finite()) {
      has_forward_ = false;
      throw NumericalError("non-finite activation after layer " + std::to_string(i) + " (" +
                           layers_[i]->describe() + ")");
    }
  }
  has_forward_ = true;
  return x;
}

Tensor LayerStack::backward(const Tensor& grad_output) {
  if (!has_forward_) throw StateError("LayerStack::backward called before forward");
  Tensor g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(g);
  }
  for (const auto* p : parameters()) {
    if (!p->grad.all_finite()) throw NumericalError("non-finite gradient for " + p->name);
  }
  return g;
}

void LayerStack::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

void LayerStack::clear_caches() noexcept {
  for (auto& l : layers_) l->clear_cache();
  has_forward_ = false;
}

void LayerStack::initialize(Rng& rng) {
  for (auto& l : layers_) l->initialize(rng);
}

std::vector<Parameter*> LayerStack::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> LayerStack::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    for (const auto* p : std::as_const(*l).parameters()) out.push_back(p);
  }
  return out;
}

std::size_t LayerStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->parameter_count();
  return n;
}

std::vector<Shape> LayerStack::trace_shapes(const Shape& input) const {
  std::vector<Shape> shapes{input};
  for (const auto& l : layers_) shapes.push_back(l->output_shape(shapes.back()));
  return shapes;
}

Shape LayerStack::output_shape(const Shape& input) const { return trace_shapes(input).back(); }

std::vector<std::uint8_t> LayerStack::activation_pattern() const {
  std::vector<std::uint8_t> out;
  for (const auto& l : layers_) l->append_activation_pattern(out);
  return out;
}

bool LayerStack::same_parameters(const LayerStack& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i]->kind() != other.layers_[i]->kind() ||
        layers_[i]->config() != other.layers_[i]->config()) {
      return false;
    }
  }
  const auto a = parameters();
  const auto b = other.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bit_identical(a[i]->value, b[i]->value)) return false;
  }
  return true;
}

}  // namespace autosen::nn
