#include "autosen/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autosen/random.hpp"

namespace autosen::nn {

namespace {

std::vector<std::size_t> pick_coordinates(std::size_t size, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= size) return idx;
  shuffle(idx.begin(), idx.end(), rng);
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(LayerStack& stack, const Tensor& input, const LossFunction& loss,
                           const GradCheckOptions& options) {
  Rng rng(options.seed);

  stack.zero_grad();
  const Tensor output = stack.forward(input);
  const Tensor analytic_input = stack.backward(loss(output).grad);
  const auto base_pattern = stack.activation_pattern();

  // Evaluates the loss at the current parameters/input; reports kink crossings.
  const auto probe = [&](const Tensor& x, bool& kink) {
    const double value = loss(stack.forward(x)).value;
    if (stack.activation_pattern() != base_pattern) kink = true;
    return value;
  };

  GradCheckReport report;
  const auto check_tensor = [&](const std::string& name, Tensor& target, const Tensor& analytic,
                                const Tensor& probe_input, bool perturb_input) {
    GradCheckEntry entry{name, 0, 0, 0.0};
    for (const std::size_t i : pick_coordinates(target.size(), options.max_coordinates_per_tensor, rng)) {
      const double saved = target[i];
      bool kink = false;
      target[i] = saved + options.step;
      const double plus = probe(perturb_input ? target : probe_input, kink);
      target[i] = saved - options.step;
      const double minus = probe(perturb_input ? target : probe_input, kink);
      target[i] = saved;
      if (kink) {
        ++entry.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * options.step);
      entry.max_relative_error = std::max(
          entry.max_relative_error, relative_error(analytic[i], numeric, options.denominator_floor));
      ++entry.checked;
    }
    report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
    report.checked += entry.checked;
    report.skipped += entry.skipped;
    report.entries.push_back(std::move(entry));
  };

  auto params = stack.parameters();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad);

  std::size_t layer_index = 0;
  std::size_t param_index = 0;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    for (auto* p : stack.layer(l).parameters()) {
      const std::string name = "layer" + std::to_string(layer_index) + "." +
                               layer_kind_name(stack.layer(l).kind()) + "." + p->name;
      check_tensor(name, p->value, analytic[param_index], input, false);
      ++param_index;
    }
    ++layer_index;
  }
  if (options.check_input) {
    Tensor x = input;
    check_tensor("input", x, analytic_input, input, true);
  }

  // Leave the stack as if only the unperturbed forward/backward had run.
  stack.zero_grad();
  stack.backward(loss(stack.forward(input)).grad);
  return report;
}

}  // namespace autosen::nn
