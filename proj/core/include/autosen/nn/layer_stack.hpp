#pragma once

#include <memory>
#include <vector>

#include "autosen/nn/layers.hpp"

namespace autosen::nn {

/// Ordered layers evaluated front to back; gradients flow back to front.
///
/// Copies are deep (layers are cloned), so a LayerStack behaves as a value.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(const LayerStack& other);
  LayerStack& operator=(const LayerStack& other);
  LayerStack(LayerStack&&) noexcept = default;
  LayerStack& operator=(LayerStack&&) noexcept = default;
  ~LayerStack() = default;

  LayerStack& add(std::unique_ptr<Layer> layer);

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  std::size_t size() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Runs every layer; throws NumericalError if any stage produces NaN/Inf.
  Tensor forward(const Tensor& batch);

  /// Reverse pass; accumulates parameter gradients and returns the input gradient.
  /// Throws StateError when no forward pass is recorded.
  Tensor backward(const Tensor& grad_output);

  void zero_grad();
  void clear_caches() noexcept;
  void initialize(Rng& rng);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

  /// Per-sample shape after each layer, starting with `input` itself.
  std::vector<Shape> trace_shapes(const Shape& input) const;
  Shape output_shape(const Shape& input) const;

  std::vector<std::uint8_t> activation_pattern() const;

  /// Bitwise equality of architecture and every parameter value.
  bool same_parameters(const LayerStack& other) const;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  bool has_forward_ = false;
};

}  // namespace autosen::nn
