#pragma once

#include <span>
#include <vector>

#include "autosen/tensor.hpp"

namespace autosen::nn {

/// Scalar loss together with its gradient with respect to the prediction.
struct LossResult {
  double value = 0.0;
  Tensor grad;
};

/// Mean squared error over every element (batch included).
/// grad = 2 * (pred - target) / element_count.
LossResult mse_loss(const Tensor& pred, const Tensor& target);

/// -log softmax(logits)[label] via log-sum-exp; grad = softmax - one_hot.
LossResult cross_entropy_loss(std::span<const double> logits, int label);

/// Batch mean of cross_entropy_loss over rows of (N x C) logits; grad scaled by 1/N.
LossResult cross_entropy_loss(const Tensor& logits, std::span<const int> labels);

std::vector<double> softmax(std::span<const double> logits);

/// Row-wise softmax of an (N x C) tensor.
Tensor softmax_rows(const Tensor& logits);

Tensor relu(const Tensor& x);

/// Index of the largest value; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace autosen::nn
