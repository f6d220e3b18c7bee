#include <gtest/gtest.h>

#include "autosen/model/autosen.hpp"
#include "autosen/nn/grad_check.hpp"
#include "autosen/nn/layers.hpp"
#include "autosen/nn/loss.hpp"
#include "oracles.hpp"

using namespace autosen;
using namespace autosen::nn;

namespace {

// Dense whose backward drops a factor of two on the input gradient.
class BrokenDense final : public Layer {
 public:
  BrokenDense(std::size_t in, std::size_t out) : inner_(in, out) {}
  LayerKind kind() const noexcept override { return LayerKind::kDense; }
  std::string describe() const override { return "BrokenDense"; }
  Shape output_shape(const Shape& input) const override { return inner_.output_shape(input); }
  Tensor forward(const Tensor& batch) override { return inner_.forward(batch); }
  Tensor backward(const Tensor& grad_output) override {
    Tensor g = inner_.backward(grad_output);
    for (auto& v : g.data()) v *= 0.5;
    return g;
  }
  void initialize(Rng& rng) override { inner_.initialize(rng); }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BrokenDense>(*this); }
  std::vector<std::uint64_t> config() const override { return inner_.config(); }

 protected:
  std::span<Parameter> parameter_storage() noexcept override { return {&inner_.weight(), 2}; }

 private:
  Dense inner_;
};

void randomize_biases(LayerStack& stack, std::uint64_t seed) {
  Rng rng(seed);
  for (auto* p : stack.parameters()) {
    if (p->value.rank() == 1) {
      for (auto& v : p->value.data()) v = rng.uniform(-0.1, 0.1);
    }
  }
}

LossFunction mse_to(Tensor target) {
  return [target = std::move(target)](const Tensor& out) { return mse_loss(out, target); };
}

LossFunction ce_to(std::vector<int> labels) {
  return [labels = std::move(labels)](const Tensor& out) { return cross_entropy_loss(out, labels); };
}

}  // namespace

TEST(RelativeError, FloorAppliesToTinyValues) {
  EXPECT_NEAR(relative_error(1.0, 1.1, 1e-6), 0.1 / 1.1, 1e-15);
  EXPECT_NEAR(relative_error(1e-9, 2e-9, 1e-6), 1e-3, 1e-15);
  EXPECT_EQ(relative_error(0.0, 0.0, 1e-6), 0.0);
}

TEST(GradCheck, DenseOnlyStack) {
  LayerStack stack;
  stack.emplace<Dense>(6, 5);
  stack.emplace<Dense>(5, 3);
  Rng rng(1);
  stack.initialize(rng);
  randomize_biases(stack, 2);
  const auto report = grad_check(stack, oracle::random_tensor({4, 6}, 3),
                                 mse_to(oracle::random_tensor({4, 3}, 4)));
  EXPECT_EQ(report.checked, 6u * 5 + 5 + 5 * 3 + 3 + 4 * 6);
  EXPECT_LT(report.max_relative_error, 1e-7);
}

TEST(GradCheck, SmallConvStackEveryCoordinate) {
  LayerStack stack;
  stack.emplace<Conv2d>(1, 3, Extent2d{2, 3}, Extent2d{2, 3});
  stack.emplace<ReLU>();
  stack.emplace<ConvTranspose2d>(3, 2, Extent2d{2, 3}, Extent2d{2, 3});
  Rng rng(5);
  stack.initialize(rng);
  randomize_biases(stack, 6);
  const auto report = grad_check(stack, oracle::random_tensor({2, 1, 6, 9}, 7),
                                 mse_to(oracle::random_tensor({2, 2, 6, 9}, 8)));
  EXPECT_GT(report.checked, 100u);
  EXPECT_LT(report.max_relative_error, 1e-6);
}

TEST(GradCheck, EncoderDecoderWithMse) {
  model::ArchitectureSpec spec;
  auto nets = model::build_autosen(spec, 11);
  LayerStack stack = nets.encoder;
  for (std::size_t i = 0; i < nets.decoder.size(); ++i) stack.add(nets.decoder.layer(i).clone());
  randomize_biases(stack, 12);
  GradCheckOptions opts;
  opts.max_coordinates_per_tensor = 24;
  opts.seed = 13;
  // Input gradients of a 45k-term loss are below finite-difference resolution.
  opts.check_input = false;
  const auto report = grad_check(stack, oracle::random_tensor({1, 1, 500, 90}, 14),
                                 mse_to(oracle::random_tensor({1, 1, 500, 90}, 15)), opts);
  EXPECT_GT(report.checked, 200u);
  EXPECT_LT(report.max_relative_error, 1e-4);
}

TEST(GradCheck, EncoderClassifierWithCrossEntropy) {
  model::ArchitectureSpec spec;
  auto nets = model::build_autosen(spec, 21);
  LayerStack stack = nets.encoder;
  for (std::size_t i = 0; i < nets.classifier.size(); ++i) {
    stack.add(nets.classifier.layer(i).clone());
  }
  randomize_biases(stack, 22);
  GradCheckOptions opts;
  opts.max_coordinates_per_tensor = 24;
  opts.seed = 23;
  opts.check_input = false;
  const auto report =
      grad_check(stack, oracle::random_tensor({2, 1, 500, 90}, 24), ce_to({3, 6}), opts);
  EXPECT_GT(report.checked, 200u);
  EXPECT_LT(report.max_relative_error, 1e-4);
}

TEST(GradCheck, DetectsWrongBackward) {
  LayerStack stack;
  stack.emplace<Dense>(4, 4);
  stack.emplace<BrokenDense>(4, 3);
  Rng rng(31);
  stack.initialize(rng);
  const auto report = grad_check(stack, oracle::random_tensor({2, 4}, 32),
                                 mse_to(oracle::random_tensor({2, 3}, 33)));
  EXPECT_GT(report.max_relative_error, 0.3);
}

TEST(GradCheck, SamplingIsSeeded) {
  LayerStack stack;
  stack.emplace<Dense>(30, 20);
  Rng rng(41);
  stack.initialize(rng);
  GradCheckOptions opts;
  opts.max_coordinates_per_tensor = 10;
  opts.seed = 42;
  const Tensor x = oracle::random_tensor({1, 30}, 43);
  const auto loss = mse_to(oracle::random_tensor({1, 20}, 44));
  const auto a = grad_check(stack, x, loss, opts);
  const auto b = grad_check(stack, x, loss, opts);
  EXPECT_EQ(a.checked, 10u * 3);
  EXPECT_EQ(a.max_relative_error, b.max_relative_error);
}
