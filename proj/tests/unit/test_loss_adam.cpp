#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autosen/error.hpp"
#include "autosen/nn/adam.hpp"
#include "autosen/nn/loss.hpp"
#include "oracles.hpp"

using namespace autosen;
using namespace autosen::nn;

TEST(Softmax, UniformAndShiftInvariant) {
  const auto p = softmax(std::vector<double>(7, 0.0));
  for (double v : p) EXPECT_NEAR(v, 1.0 / 7.0, 1e-15);

  Rng rng(1);
  std::vector<double> x(7);
  for (auto& v : x) v = rng.uniform(-5, 5);
  auto shifted = x;
  for (auto& v : shifted) v += 123.25;
  const auto a = softmax(x);
  const auto b = softmax(shifted);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-12);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const auto p = softmax(std::vector<double>{1000.0, 0.0, -1000.0});
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Relu, Examples) {
  EXPECT_EQ(relu(Tensor({3}, {-1.0, 0.0, 2.0})), Tensor({3}, {0.0, 0.0, 2.0}));
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{1.0, 1.0}), 0u);
}

TEST(Mse, Examples) {
  const Tensor a = oracle::random_tensor({2, 3, 4}, 2);
  EXPECT_EQ(mse_loss(a, a).value, 0.0);
  Tensor b = a;
  for (auto& v : b.data()) v -= 1.0;
  EXPECT_NEAR(mse_loss(a, b).value, 1.0, 1e-15);
  EXPECT_THROW(mse_loss(a, Tensor({2, 12})), ShapeError);
}

TEST(Mse, MatchesTwoPassOracleAndGradient) {
  const Tensor a = oracle::random_tensor({4, 1, 50, 9}, 3, 3.0);
  const Tensor b = oracle::random_tensor({4, 1, 50, 9}, 4, 3.0);
  const auto r = mse_loss(a, b);
  EXPECT_NEAR(r.value, oracle::mse(a, b), 1e-12);
  EXPECT_GE(r.value, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(r.grad[i], 2.0 * (a[i] - b[i]) / static_cast<double>(a.size()), 1e-15);
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const auto r = cross_entropy_loss(std::vector<double>(7, 0.3), 4);
  EXPECT_NEAR(r.value, std::log(7.0), 1e-12);
  EXPECT_NEAR(r.value, 1.9459, 1e-4);
}

TEST(CrossEntropy, ConfidentCorrectLogitGoesToZero) {
  std::vector<double> logits(7, 0.0);
  logits[2] = 800.0;
  const auto r = cross_entropy_loss(logits, 2);
  EXPECT_GE(r.value, 0.0);
  EXPECT_LT(r.value, 1e-300);
  logits[2] = -800.0;
  EXPECT_NEAR(cross_entropy_loss(logits, 2).value, 800.0 + std::log(6.0), 1e-9);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(7);
    for (auto& v : x) v = rng.uniform(-4, 4);
    const int label = static_cast<int>(rng.uniform_index(7));
    const auto r = cross_entropy_loss(x, label);
    const double h = 1e-5;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto up = x, down = x;
      up[i] += h;
      down[i] -= h;
      const double fd = (cross_entropy_loss(up, label).value - cross_entropy_loss(down, label).value) /
                        (2 * h);
      EXPECT_LT(std::abs(r.grad[i] - fd) / std::max({std::abs(r.grad[i]), std::abs(fd), 1e-6}), 1e-6);
    }
  }
}

TEST(CrossEntropy, BatchAveragesRows) {
  const Tensor logits({2, 3}, {1.0, 2.0, 3.0, 0.5, -0.5, 0.0});
  const std::vector<int> labels{2, 0};
  const auto r = cross_entropy_loss(logits, labels);
  const double l0 = cross_entropy_loss(std::vector<double>{1.0, 2.0, 3.0}, 2).value;
  const double l1 = cross_entropy_loss(std::vector<double>{0.5, -0.5, 0.0}, 0).value;
  EXPECT_NEAR(r.value, 0.5 * (l0 + l1), 1e-15);
  const auto g0 = cross_entropy_loss(std::vector<double>{1.0, 2.0, 3.0}, 2).grad;
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(r.grad.at(0, c), 0.5 * g0[c], 1e-15);
}

TEST(CrossEntropy, LabelOutOfRange) {
  EXPECT_THROW(cross_entropy_loss(std::vector<double>(3, 0.0), 3), InvalidInput);
  EXPECT_THROW(cross_entropy_loss(std::vector<double>(3, 0.0), -1), InvalidInput);
}

namespace {

Parameter make_param(const Tensor& value, const Tensor& grad) {
  Parameter p;
  p.name = "p";
  p.value = value;
  p.grad = grad;
  return p;
}

}  // namespace

TEST(Adam, FirstStepMovesEachElementByLr) {
  Parameter p = make_param(oracle::random_tensor({5}, 6), Tensor({5}, {3.0, -0.2, 1e-3, -40.0, 7.0}));
  const Tensor before = p.value;
  AdamState state(AdamOptions{.lr = 1e-3});
  Parameter* params[] = {&p};
  adam_step(params, state);
  EXPECT_EQ(state.step, 1u);
  for (std::size_t i = 0; i < 5; ++i) {
    const double g = p.grad[i];
    // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
    const double expected = 1e-3 * g / (std::abs(g) + 1e-8);
    EXPECT_NEAR(before[i] - p.value[i], expected, 1e-15);
    EXPECT_NEAR(std::abs(before[i] - p.value[i]), 1e-3, 1e-7);
  }
}

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  Parameter p = make_param(oracle::random_tensor({4}, 7), Tensor({4}, {1.0, 1.0, 1.0, 1.0}));
  AdamState state;
  Parameter* params[] = {&p};
  adam_step(params, state);
  const Tensor after_first = p.value;
  const Tensor m1 = state.first_moment[0];
  const Tensor v1 = state.second_moment[0];
  p.zero_grad();
  // A zero gradient still carries momentum from step 1, so only a fresh state stays put.
  Parameter q = make_param(oracle::random_tensor({4}, 8), Tensor({4}));
  const Tensor q0 = q.value;
  AdamState fresh;
  Parameter* qs[] = {&q};
  adam_step(qs, fresh);
  adam_step(qs, fresh);
  EXPECT_EQ(q.value, q0);
  adam_step(params, state);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(state.first_moment[0][i], 0.9 * m1[i]);
    EXPECT_DOUBLE_EQ(state.second_moment[0][i], 0.999 * v1[i]);
  }
  EXPECT_NE(p.value, after_first);
}

TEST(Adam, DeterministicTrajectories) {
  auto run = [] {
    Parameter p = make_param(oracle::random_tensor({3, 3}, 9), Tensor({3, 3}));
    AdamState state;
    Parameter* params[] = {&p};
    for (int s = 0; s < 50; ++s) {
      for (std::size_t i = 0; i < p.value.size(); ++i) p.grad[i] = 2.0 * p.value[i] - 0.1 * i;
      adam_step(params, state);
    }
    return p.value;
  };
  EXPECT_TRUE(bit_identical(run(), run()));
}

TEST(Adam, ShapeMismatchAgainstState) {
  Parameter p = make_param(Tensor({3}), Tensor({3}));
  AdamState state;
  Parameter* params[] = {&p};
  adam_step(params, state);
  Parameter other = make_param(Tensor({4}), Tensor({4}));
  Parameter* wrong[] = {&other};
  EXPECT_THROW(adam_step(wrong, state), ShapeError);
  Parameter* two[] = {&p, &other};
  EXPECT_THROW(adam_step(two, state), ShapeError);
  Parameter bad_grad = make_param(Tensor({3}), Tensor({2}));
  Parameter* mism[] = {&bad_grad};
  AdamState fresh;
  EXPECT_THROW(adam_step(mism, fresh), ShapeError);
}
