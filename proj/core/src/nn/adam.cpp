#include "autosen/nn/adam.hpp"

#include <cmath>
#include <string>

#include "autosen/error.hpp"

namespace autosen::nn {

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (state.step == 0 && state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->value.shape());
      state.second_moment.emplace_back(p->value.shape());
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters vs " +
                     std::to_string(state.first_moment.size()) + " moment slots");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& shape = params[k]->value.shape();
    if (params[k]->grad.shape() != shape || state.first_moment[k].shape() != shape) {
      throw ShapeError("adam_step: shape mismatch for parameter " + params[k]->name);
    }
  }

  const auto& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(o.beta1, t);
  const double correction2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k]->value.data();
    const auto grad = params[k]->grad.data();
    auto m = state.first_moment[k].data();
    auto v = state.second_moment[k].data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * grad[i];
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace autosen::nn
