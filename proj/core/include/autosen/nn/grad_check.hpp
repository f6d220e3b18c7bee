#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "autosen/nn/layer_stack.hpp"
#include "autosen/nn/loss.hpp"

namespace autosen::nn {

using LossFunction = std::function<LossResult(const Tensor& output)>;

struct GradCheckOptions {
  double step = 1e-5;
  /// Coordinates sampled per tensor; 0 checks every coordinate.
  std::size_t max_coordinates_per_tensor = 0;
  std::uint64_t seed = 0;
  /// Lower bound on the relative-error denominator, so gradients that are
  /// zero up to rounding are compared absolutely.
  double denominator_floor = 1e-6;
  bool check_input = true;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  /// Coordinates whose +/- step flipped a ReLU unit, where the loss is not differentiable.
  std::size_t skipped = 0;
};

/// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Compares backward() against central finite differences of `loss`.
GradCheckReport grad_check(LayerStack& stack, const Tensor& input, const LossFunction& loss,
                           const GradCheckOptions& options = {});

}  // namespace autosen::nn
