#include "autosen/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "autosen/error.hpp"

namespace autosen::nn {

namespace {

double log_sum_exp(std::span<const double> x) {
  const double peak = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double v : x) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

}  // namespace

LossResult mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ShapeError("mse_loss: prediction " + shape_string(pred.shape()) + " vs target " +
                     shape_string(target.shape()));
  }
  if (pred.size() == 0) throw InvalidInput("mse_loss: empty tensors");
  const double scale = 1.0 / static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
    r.grad[i] = 2.0 * d * scale;
  }
  r.value = sum * scale;
  return r;
}

LossResult cross_entropy_loss(std::span<const double> logits, int label) {
  if (logits.empty()) throw InvalidInput("cross_entropy_loss: empty logits");
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) {
    throw InvalidInput("cross_entropy_loss: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(logits.size()) + ")");
  }
  const double lse = log_sum_exp(logits);
  LossResult r{std::max(0.0, lse - logits[static_cast<std::size_t>(label)]),
               Tensor({logits.size()})};
  for (std::size_t c = 0; c < logits.size(); ++c) r.grad[c] = std::exp(logits[c] - lse);
  r.grad[static_cast<std::size_t>(label)] -= 1.0;
  return r;
}

LossResult cross_entropy_loss(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("cross_entropy_loss: logits " + shape_string(logits.shape()) + " for " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  if (n == 0) throw InvalidInput("cross_entropy_loss: empty batch");
  const double scale = 1.0 / static_cast<double>(n);
  LossResult r{0.0, Tensor(logits.shape())};
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = logits.data().subspan(s * classes, classes);
    const LossResult one = cross_entropy_loss(row, labels[s]);
    r.value += one.value;
    for (std::size_t c = 0; c < classes; ++c) r.grad[s * classes + c] = one.grad[c] * scale;
  }
  r.value *= scale;
  return r;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax_rows: expected (N x C) logits");
  Tensor out(logits.shape());
  const std::size_t classes = logits.dim(1);
  for (std::size_t s = 0; s < logits.dim(0); ++s) {
    const auto p = softmax(logits.data().subspan(s * classes, classes));
    std::copy(p.begin(), p.end(), out.data().begin() + static_cast<std::ptrdiff_t>(s * classes));
  }
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace autosen::nn
