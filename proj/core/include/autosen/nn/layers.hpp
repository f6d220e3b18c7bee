#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "autosen/random.hpp"
#include "autosen/tensor.hpp"

namespace autosen::nn {

using Shape = Tensor::Shape;

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

/// Serialisation tags; values are part of the checkpoint format.
enum class LayerKind : std::uint8_t {
  kConv2d = 1,
  kConvTranspose2d = 2,
  kDense = 3,
  kReLU = 4,
  kReshape = 5,
};

const char* layer_kind_name(LayerKind kind) noexcept;

struct Extent2d {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Extent2d&, const Extent2d&) = default;
};

/// A differentiable stage operating on a batch (leading axis = sample).
///
/// forward() caches what backward() needs; backward() accumulates into the
/// parameter gradients and returns the gradient with respect to the input.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const noexcept = 0;
  virtual std::string describe() const = 0;

  /// Per-sample output shape for a per-sample input shape. Throws ShapeError.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor forward(const Tensor& batch) = 0;
  virtual Tensor backward(const Tensor& grad_output) = 0;

  virtual void initialize(Rng& /*rng*/) {}
  virtual void clear_cache() noexcept {}
  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Layer hyper-parameters as written to checkpoints (kind specific).
  virtual std::vector<std::uint64_t> config() const = 0;

  /// Appends the on/off state of every piecewise-linear unit seen in the last forward.
  virtual void append_activation_pattern(std::vector<std::uint8_t>& /*out*/) const {}

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

 protected:
  virtual std::span<Parameter> parameter_storage() noexcept { return {}; }
  std::span<const Parameter> parameter_storage() const noexcept {
    return const_cast<Layer*>(this)->parameter_storage();
  }
};

/// Strided 2-D convolution, valid padding. Input (N, C_in, H, W).
/// weight (C_out, C_in, kH, kW), bias (C_out).
class Conv2d final : public Layer {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, Extent2d kernel, Extent2d stride);

  LayerKind kind() const noexcept override { return LayerKind::kConv2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& batch) override;
  Tensor backward(const Tensor& grad_output) override;
  void initialize(Rng& rng) override;
  void clear_cache() noexcept override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2d>(*this); }
  std::vector<std::uint64_t> config() const override;

  Parameter& weight() noexcept { return params_[0]; }
  Parameter& bias() noexcept { return params_[1]; }
  const Parameter& weight() const noexcept { return params_[0]; }
  const Parameter& bias() const noexcept { return params_[1]; }

 protected:
  std::span<Parameter> parameter_storage() noexcept override { return params_; }

 private:
  std::size_t in_channels_;
  std::size_t out_channels_;
  Extent2d kernel_;
  Extent2d stride_;
  std::array<Parameter, 2> params_;
  Shape input_shape_;
  Tensor columns_;  // (N, C_in*kH*kW, H'*W') from the last forward
  bool has_cache_ = false;
};

/// Transposed convolution, the adjoint of Conv2d with the same geometry.
/// Input (N, C_in, H, W) -> (N, C_out, (H-1)*sH + kH, (W-1)*sW + kW).
/// weight (C_in, C_out, kH, kW), bias (C_out).
class ConvTranspose2d final : public Layer {
 public:
  ConvTranspose2d(std::size_t in_channels, std::size_t out_channels, Extent2d kernel,
                  Extent2d stride);

  LayerKind kind() const noexcept override { return LayerKind::kConvTranspose2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& batch) override;
  Tensor backward(const Tensor& grad_output) override;
  void initialize(Rng& rng) override;
  void clear_cache() noexcept override;
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ConvTranspose2d>(*this);
  }
  std::vector<std::uint64_t> config() const override;

  Parameter& weight() noexcept { return params_[0]; }
  Parameter& bias() noexcept { return params_[1]; }
  const Parameter& weight() const noexcept { return params_[0]; }
  const Parameter& bias() const noexcept { return params_[1]; }

 protected:
  std::span<Parameter> parameter_storage() noexcept override { return params_; }

 private:
  std::size_t in_channels_;
  std::size_t out_channels_;
  Extent2d kernel_;
  Extent2d stride_;
  std::array<Parameter, 2> params_;
  Tensor input_;
  bool has_cache_ = false;
};

/// Fully connected layer on (N, in_dim). weight (out_dim, in_dim), bias (out_dim).
class Dense final : public Layer {
 public:
  Dense(std::size_t in_dim, std::size_t out_dim);

  LayerKind kind() const noexcept override { return LayerKind::kDense; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& batch) override;
  Tensor backward(const Tensor& grad_output) override;
  void initialize(Rng& rng) override;
  void clear_cache() noexcept override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }
  std::vector<std::uint64_t> config() const override;

  Parameter& weight() noexcept { return params_[0]; }
  Parameter& bias() noexcept { return params_[1]; }
  const Parameter& weight() const noexcept { return params_[0]; }
  const Parameter& bias() const noexcept { return params_[1]; }

 protected:
  std::span<Parameter> parameter_storage() noexcept override { return params_; }

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::array<Parameter, 2> params_;
  Tensor input_;
  bool has_cache_ = false;
};

class ReLU final : public Layer {
 public:
  LayerKind kind() const noexcept override { return LayerKind::kReLU; }
  std::string describe() const override { return "ReLU"; }
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor forward(const Tensor& batch) override;
  Tensor backward(const Tensor& grad_output) override;
  void clear_cache() noexcept override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(*this); }
  std::vector<std::uint64_t> config() const override { return {}; }
  void append_activation_pattern(std::vector<std::uint8_t>& out) const override;

 private:
  Tensor input_;
  bool has_cache_ = false;
};

/// Reinterprets each sample with a new per-sample shape (flatten / unflatten).
class Reshape final : public Layer {
 public:
  explicit Reshape(Shape target);

  LayerKind kind() const noexcept override { return LayerKind::kReshape; }
  std::string describe() const override;
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& batch) override;
  Tensor backward(const Tensor& grad_output) override;
  void clear_cache() noexcept override { has_cache_ = false; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Reshape>(*this); }
  std::vector<std::uint64_t> config() const override;

  const Shape& target() const noexcept { return target_; }

 private:
  Shape target_;
  Shape input_shape_;
  bool has_cache_ = false;
};

/// Rebuilds a layer from its checkpoint tag and config(); parameters zeroed.
std::unique_ptr<Layer> make_layer(LayerKind kind, std::span<const std::uint64_t> config);

}  // namespace autosen::nn
