#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autosen/nn/layers.hpp"

namespace autosen::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment accumulators mirror the parameter list they were first stepped with.
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  AdamState() = default;
  explicit AdamState(AdamOptions opts) : options(opts) {}
};

/// One bias-corrected Adam update using each parameter's accumulated grad.
/// Throws ShapeError if the parameter list does not match the state.
void adam_step(std::span<Parameter* const> params, AdamState& state);

}  // namespace autosen::nn
