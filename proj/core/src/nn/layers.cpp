#include "autosen/nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <sstream>
#include <string>

#include "autosen/error.hpp"

namespace autosen::nn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

/// Geometry of a valid-padding sliding window over a (C, H, W) image.
struct WindowGeometry {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
  Extent2d kernel;
  Extent2d stride;

  std::size_t out_h() const { return (height - kernel.h) / stride.h + 1; }
  std::size_t out_w() const { return (width - kernel.w) / stride.w + 1; }
  std::size_t patch() const { return channels * kernel.h * kernel.w; }
  std::size_t positions() const { return out_h() * out_w(); }
  std::size_t image() const { return channels * height * width; }
};

// columns is (C*kH*kW) x (H'*W'), row index (c*kH + ky)*kW + kx.
void im2col(const double* image, const WindowGeometry& g, double* columns) {
  const std::size_t oh = g.out_h();
  const std::size_t ow = g.out_w();
  const std::size_t positions = oh * ow;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel.h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel.w; ++kx) {
        double* row = columns + ((c * g.kernel.h + ky) * g.kernel.w + kx) * positions;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const double* src = image + (c * g.height + oy * g.stride.h + ky) * g.width + kx;
          for (std::size_t ox = 0; ox < ow; ++ox) row[oy * ow + ox] = src[ox * g.stride.w];
        }
      }
    }
  }
}

void col2im_add(const double* columns, const WindowGeometry& g, double* image) {
  const std::size_t oh = g.out_h();
  const std::size_t ow = g.out_w();
  const std::size_t positions = oh * ow;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel.h; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel.w; ++kx) {
        const double* row = columns + ((c * g.kernel.h + ky) * g.kernel.w + kx) * positions;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          double* dst = image + (c * g.height + oy * g.stride.h + ky) * g.width + kx;
          for (std::size_t ox = 0; ox < ow; ++ox) dst[ox * g.stride.w] += row[oy * ow + ox];
        }
      }
    }
  }
}

void check_extent(Extent2d e, const char* what) {
  if (e.h == 0 || e.w == 0) throw InvalidInput(std::string(what) + " extents must be >= 1");
}

void check_batch_rank(const Tensor& t, std::size_t rank, const char* layer) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(layer) + ": expected rank-" + std::to_string(rank) +
                     " batch, got " + shape_string(t.shape()));
  }
}

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
}

Parameter make_parameter(std::string name, Shape shape) {
  Tensor value(shape);
  Tensor grad(std::move(shape));
  return Parameter{std::move(name), std::move(value), std::move(grad)};
}

std::string extent_string(Extent2d e) {
  return "(" + std::to_string(e.h) + "," + std::to_string(e.w) + ")";
}

}  // namespace

const char* layer_kind_name(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::kConv2d:
      return "conv2d";
    case LayerKind::kConvTranspose2d:
      return "conv_transpose2d";
    case LayerKind::kDense:
      return "dense";
    case LayerKind::kReLU:
      return "relu";
    case LayerKind::kReshape:
      return "reshape";
  }
  return "unknown";
}

std::vector<Parameter*> Layer::parameters() {
  std::vector<Parameter*> out;
  for (auto& p : parameter_storage()) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> Layer::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& p : parameter_storage()) out.push_back(&p);
  return out;
}

std::size_t Layer::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameter_storage()) n += p.value.size();
  return n;
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, Extent2d kernel, Extent2d stride)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), stride_(stride) {
  check_extent(kernel, "conv2d kernel");
  check_extent(stride, "conv2d stride");
  if (in_channels == 0 || out_channels == 0) throw InvalidInput("conv2d: zero channels");
  params_[0] = make_parameter("weight", {out_channels, in_channels, kernel.h, kernel.w});
  params_[1] = make_parameter("bias", {out_channels});
}

std::string Conv2d::describe() const {
  return "Conv2d " + std::to_string(in_channels_) + "->" + std::to_string(out_channels_) +
         " kernel " + extent_string(kernel_) + " stride " + extent_string(stride_);
}

Shape Conv2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_) {
    throw ShapeError("conv2d: expected (" + std::to_string(in_channels_) + " x H x W) input, got " +
                     shape_string(input));
  }
  if (input[1] < kernel_.h || input[2] < kernel_.w) {
    throw ShapeError("conv2d: input " + shape_string(input) + " smaller than kernel " +
                     extent_string(kernel_));
  }
  return {out_channels_, (input[1] - kernel_.h) / stride_.h + 1,
          (input[2] - kernel_.w) / stride_.w + 1};
}

Tensor Conv2d::forward(const Tensor& batch) {
  check_batch_rank(batch, 4, "conv2d");
  const Shape out_sample = output_shape({batch.dim(1), batch.dim(2), batch.dim(3)});
  const WindowGeometry g{in_channels_, batch.dim(2), batch.dim(3), kernel_, stride_};
  const std::size_t n = batch.dim(0);
  const std::size_t patch = g.patch();
  const std::size_t positions = g.positions();

  columns_ = Tensor({n, patch, positions});
  Tensor out({n, out_sample[0], out_sample[1], out_sample[2]});
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(out_channels_),
                      static_cast<Eigen::Index>(patch));
  const ConstVecMap b(bias().value.raw(), static_cast<Eigen::Index>(out_channels_));
  for (std::size_t s = 0; s < n; ++s) {
    double* cols = columns_.raw() + s * patch * positions;
    im2col(batch.raw() + s * g.image(), g, cols);
    const ConstMatMap c(cols, static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
    MatMap y(out.raw() + s * out_channels_ * positions, static_cast<Eigen::Index>(out_channels_),
             static_cast<Eigen::Index>(positions));
    y.noalias() = w * c;
    y.colwise() += b;
  }
  input_shape_ = batch.shape();
  has_cache_ = true;
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_output) {
  if (!has_cache_) throw StateError("conv2d: backward called before forward");
  const std::size_t n = input_shape_[0];
  const WindowGeometry g{in_channels_, input_shape_[2], input_shape_[3], kernel_, stride_};
  const std::size_t patch = g.patch();
  const std::size_t positions = g.positions();
  if (grad_output.shape() != Shape{n, out_channels_, g.out_h(), g.out_w()}) {
    throw ShapeError("conv2d: gradient shape " + shape_string(grad_output.shape()) +
                     " does not match forward output");
  }

  Tensor grad_input(input_shape_);
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(out_channels_),
                      static_cast<Eigen::Index>(patch));
  MatMap dw(weight().grad.raw(), static_cast<Eigen::Index>(out_channels_),
            static_cast<Eigen::Index>(patch));
  VecMap db(bias().grad.raw(), static_cast<Eigen::Index>(out_channels_));
  RowMatrix dcols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
  for (std::size_t s = 0; s < n; ++s) {
    const ConstMatMap c(columns_.raw() + s * patch * positions, static_cast<Eigen::Index>(patch),
                        static_cast<Eigen::Index>(positions));
    const ConstMatMap gy(grad_output.raw() + s * out_channels_ * positions,
                         static_cast<Eigen::Index>(out_channels_),
                         static_cast<Eigen::Index>(positions));
    dw.noalias() += gy * c.transpose();
    db += gy.rowwise().sum();
    dcols.noalias() = w.transpose() * gy;
    col2im_add(dcols.data(), g, grad_input.raw() + s * g.image());
  }
  return grad_input;
}

void Conv2d::initialize(Rng& rng) {
  const double fan_in = static_cast<double>(in_channels_ * kernel_.h * kernel_.w);
  fill_uniform(weight().value, std::sqrt(6.0 / fan_in), rng);
  bias().value.fill(0.0);
}

void Conv2d::clear_cache() noexcept {
  columns_ = Tensor();
  has_cache_ = false;
}

std::vector<std::uint64_t> Conv2d::config() const {
  return {in_channels_, out_channels_, kernel_.h, kernel_.w, stride_.h, stride_.w};
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(std::size_t in_channels, std::size_t out_channels,
                                 Extent2d kernel, Extent2d stride)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_(kernel), stride_(stride) {
  check_extent(kernel, "conv_transpose2d kernel");
  check_extent(stride, "conv_transpose2d stride");
  if (in_channels == 0 || out_channels == 0) throw InvalidInput("conv_transpose2d: zero channels");
  params_[0] = make_parameter("weight", {in_channels, out_channels, kernel.h, kernel.w});
  params_[1] = make_parameter("bias", {out_channels});
}

std::string ConvTranspose2d::describe() const {
  return "ConvTranspose2d " + std::to_string(in_channels_) + "->" +
         std::to_string(out_channels_) + " kernel " + extent_string(kernel_) + " stride " +
         extent_string(stride_);
}

Shape ConvTranspose2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[0] != in_channels_ || input[1] == 0 || input[2] == 0) {
    throw ShapeError("conv_transpose2d: expected (" + std::to_string(in_channels_) +
                     " x H x W) input, got " + shape_string(input));
  }
  return {out_channels_, (input[1] - 1) * stride_.h + kernel_.h,
          (input[2] - 1) * stride_.w + kernel_.w};
}

Tensor ConvTranspose2d::forward(const Tensor& batch) {
  check_batch_rank(batch, 4, "conv_transpose2d");
  const Shape out_sample = output_shape({batch.dim(1), batch.dim(2), batch.dim(3)});
  const WindowGeometry g{out_channels_, out_sample[1], out_sample[2], kernel_, stride_};
  const std::size_t n = batch.dim(0);
  const std::size_t patch = g.patch();
  const std::size_t positions = g.positions();  // equals H_in * W_in

  Tensor out({n, out_sample[0], out_sample[1], out_sample[2]});
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(in_channels_),
                      static_cast<Eigen::Index>(patch));
  RowMatrix cols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
  const std::size_t plane = out_sample[1] * out_sample[2];
  for (std::size_t s = 0; s < n; ++s) {
    const ConstMatMap x(batch.raw() + s * in_channels_ * positions,
                        static_cast<Eigen::Index>(in_channels_),
                        static_cast<Eigen::Index>(positions));
    cols.noalias() = w.transpose() * x;
    double* y = out.raw() + s * g.image();
    col2im_add(cols.data(), g, y);
    for (std::size_t c = 0; c < out_channels_; ++c) {
      const double b = bias().value[c];
      for (std::size_t k = 0; k < plane; ++k) y[c * plane + k] += b;
    }
  }
  input_ = batch;
  has_cache_ = true;
  return out;
}

Tensor ConvTranspose2d::backward(const Tensor& grad_output) {
  if (!has_cache_) throw StateError("conv_transpose2d: backward called before forward");
  const std::size_t n = input_.dim(0);
  const Shape out_sample = output_shape({input_.dim(1), input_.dim(2), input_.dim(3)});
  if (grad_output.shape() != Shape{n, out_sample[0], out_sample[1], out_sample[2]}) {
    throw ShapeError("conv_transpose2d: gradient shape " + shape_string(grad_output.shape()) +
                     " does not match forward output");
  }
  const WindowGeometry g{out_channels_, out_sample[1], out_sample[2], kernel_, stride_};
  const std::size_t patch = g.patch();
  const std::size_t positions = g.positions();
  const std::size_t plane = out_sample[1] * out_sample[2];

  Tensor grad_input(input_.shape());
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(in_channels_),
                      static_cast<Eigen::Index>(patch));
  MatMap dw(weight().grad.raw(), static_cast<Eigen::Index>(in_channels_),
            static_cast<Eigen::Index>(patch));
  RowMatrix cols(static_cast<Eigen::Index>(patch), static_cast<Eigen::Index>(positions));
  for (std::size_t s = 0; s < n; ++s) {
    const double* gy = grad_output.raw() + s * g.image();
    im2col(gy, g, cols.data());
    const ConstMatMap x(input_.raw() + s * in_channels_ * positions,
                        static_cast<Eigen::Index>(in_channels_),
                        static_cast<Eigen::Index>(positions));
    MatMap dx(grad_input.raw() + s * in_channels_ * positions,
              static_cast<Eigen::Index>(in_channels_), static_cast<Eigen::Index>(positions));
    dx.noalias() = w * cols;
    dw.noalias() += x * cols.transpose();
    for (std::size_t c = 0; c < out_channels_; ++c) {
      double sum = 0.0;
      for (std::size_t k = 0; k < plane; ++k) sum += gy[c * plane + k];
      bias().grad[c] += sum;
    }
  }
  return grad_input;
}

void ConvTranspose2d::initialize(Rng& rng) {
  // Each output position sees in_channels * ceil(k/s) taps per axis.
  const std::size_t taps_h = (kernel_.h + stride_.h - 1) / stride_.h;
  const std::size_t taps_w = (kernel_.w + stride_.w - 1) / stride_.w;
  const double fan_in = static_cast<double>(in_channels_ * taps_h * taps_w);
  fill_uniform(weight().value, std::sqrt(6.0 / fan_in), rng);
  bias().value.fill(0.0);
}

void ConvTranspose2d::clear_cache() noexcept {
  input_ = Tensor();
  has_cache_ = false;
}

std::vector<std::uint64_t> ConvTranspose2d::config() const {
  return {in_channels_, out_channels_, kernel_.h, kernel_.w, stride_.h, stride_.w};
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(std::size_t in_dim, std::size_t out_dim) : in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim == 0 || out_dim == 0) throw InvalidInput("dense: zero dimension");
  params_[0] = make_parameter("weight", {out_dim, in_dim});
  params_[1] = make_parameter("bias", {out_dim});
}

std::string Dense::describe() const {
  return "Dense " + std::to_string(in_dim_) + "->" + std::to_string(out_dim_);
}

Shape Dense::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in_dim_) {
    throw ShapeError("dense: expected input of length " + std::to_string(in_dim_) + ", got " +
                     shape_string(input));
  }
  return {out_dim_};
}

Tensor Dense::forward(const Tensor& batch) {
  check_batch_rank(batch, 2, "dense");
  output_shape({batch.dim(1)});
  const auto n = static_cast<Eigen::Index>(batch.dim(0));
  Tensor out({batch.dim(0), out_dim_});
  const ConstMatMap x(batch.raw(), n, static_cast<Eigen::Index>(in_dim_));
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(out_dim_),
                      static_cast<Eigen::Index>(in_dim_));
  const ConstVecMap b(bias().value.raw(), static_cast<Eigen::Index>(out_dim_));
  MatMap y(out.raw(), n, static_cast<Eigen::Index>(out_dim_));
  y.noalias() = x * w.transpose();
  y.rowwise() += b.transpose();
  input_ = batch;
  has_cache_ = true;
  return out;
}

Tensor Dense::backward(const Tensor& grad_output) {
  if (!has_cache_) throw StateError("dense: backward called before forward");
  const auto n = static_cast<Eigen::Index>(input_.dim(0));
  if (grad_output.shape() != Shape{input_.dim(0), out_dim_}) {
    throw ShapeError("dense: gradient shape " + shape_string(grad_output.shape()) +
                     " does not match forward output");
  }
  Tensor grad_input(input_.shape());
  const ConstMatMap x(input_.raw(), n, static_cast<Eigen::Index>(in_dim_));
  const ConstMatMap gy(grad_output.raw(), n, static_cast<Eigen::Index>(out_dim_));
  const ConstMatMap w(weight().value.raw(), static_cast<Eigen::Index>(out_dim_),
                      static_cast<Eigen::Index>(in_dim_));
  MatMap dw(weight().grad.raw(), static_cast<Eigen::Index>(out_dim_),
            static_cast<Eigen::Index>(in_dim_));
  VecMap db(bias().grad.raw(), static_cast<Eigen::Index>(out_dim_));
  MatMap dx(grad_input.raw(), n, static_cast<Eigen::Index>(in_dim_));
  dw.noalias() += gy.transpose() * x;
  db += gy.colwise().sum().transpose();
  dx.noalias() = gy * w;
  return grad_input;
}

void Dense::initialize(Rng& rng) {
  fill_uniform(weight().value, std::sqrt(6.0 / static_cast<double>(in_dim_)), rng);
  bias().value.fill(0.0);
}

void Dense::clear_cache() noexcept {
  input_ = Tensor();
  has_cache_ = false;
}

std::vector<std::uint64_t> Dense::config() const { return {in_dim_, out_dim_}; }

// ---------------------------------------------------------------------------
// ReLU

Tensor ReLU::forward(const Tensor& batch) {
  Tensor out = batch;
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  input_ = batch;
  has_cache_ = true;
  return out;
}

Tensor ReLU::backward(const Tensor& grad_output) {
  if (!has_cache_) throw StateError("relu: backward called before forward");
  if (grad_output.shape() != input_.shape()) {
    throw ShapeError("relu: gradient shape " + shape_string(grad_output.shape()) +
                     " does not match forward output");
  }
  Tensor grad = grad_output;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(input_[i] > 0.0)) grad[i] = 0.0;
  }
  return grad;
}

void ReLU::clear_cache() noexcept {
  input_ = Tensor();
  has_cache_ = false;
}

void ReLU::append_activation_pattern(std::vector<std::uint8_t>& out) const {
  for (double v : input_.data()) out.push_back(v > 0.0 ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Reshape

Reshape::Reshape(Shape target) : target_(std::move(target)) {
  if (target_.empty() || element_count(target_) == 0) {
    throw InvalidInput("reshape: target shape must be non-empty");
  }
}

std::string Reshape::describe() const { return "Reshape -> " + shape_string(target_); }

Shape Reshape::output_shape(const Shape& input) const {
  if (element_count(input) != element_count(target_)) {
    throw ShapeError("reshape: cannot map " + shape_string(input) + " to " +
                     shape_string(target_));
  }
  return target_;
}

Tensor Reshape::forward(const Tensor& batch) {
  if (batch.rank() < 2) throw ShapeError("reshape: batch must have a leading sample axis");
  Shape sample(batch.shape().begin() + 1, batch.shape().end());
  output_shape(sample);
  Shape out{batch.dim(0)};
  out.insert(out.end(), target_.begin(), target_.end());
  input_shape_ = batch.shape();
  has_cache_ = true;
  return batch.reshaped(std::move(out));
}

Tensor Reshape::backward(const Tensor& grad_output) {
  if (!has_cache_) throw StateError("reshape: backward called before forward");
  return grad_output.reshaped(input_shape_);
}

std::vector<std::uint64_t> Reshape::config() const {
  return std::vector<std::uint64_t>(target_.begin(), target_.end());
}

// ---------------------------------------------------------------------------

std::unique_ptr<Layer> make_layer(LayerKind kind, std::span<const std::uint64_t> config) {
  const auto need = [&](std::size_t n) {
    if (config.size() != n) {
      throw FormatError(std::string("layer ") + layer_kind_name(kind) + ": expected " +
                        std::to_string(n) + " config values, got " +
                        std::to_string(config.size()));
    }
  };
  switch (kind) {
    case LayerKind::kConv2d:
      need(6);
      return std::make_unique<Conv2d>(config[0], config[1], Extent2d{config[2], config[3]},
                                      Extent2d{config[4], config[5]});
    case LayerKind::kConvTranspose2d:
      need(6);
      return std::make_unique<ConvTranspose2d>(config[0], config[1],
                                               Extent2d{config[2], config[3]},
                                               Extent2d{config[4], config[5]});
    case LayerKind::kDense:
      need(2);
      return std::make_unique<Dense>(config[0], config[1]);
    case LayerKind::kReLU:
      need(0);
      return std::make_unique<ReLU>();
    case LayerKind::kReshape:
      return std::make_unique<Reshape>(Shape(config.begin(), config.end()));
  }
  throw FormatError("unknown layer kind tag " + std::to_string(static_cast<int>(kind)));
}

}  // namespace autosen::nn
