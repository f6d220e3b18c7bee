#include "autosen/csi/csi.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "autosen/error.hpp"

namespace autosen::csi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_indices(std::span<const int> indices) {
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (indices[i] <= indices[i - 1]) {
      throw InvalidInput("subcarrier indices must be strictly increasing (position " +
                         std::to_string(i) + ")");
    }
  }
}

}  // namespace

std::vector<int> intel5300_subcarrier_indices() {
  std::vector<int> m;
  m.reserve(30);
  for (int v = -28; v <= -2; v += 2) m.push_back(v);
  m.push_back(-1);
  m.push_back(1);
  for (int v = 3; v <= 27; v += 2) m.push_back(v);
  m.push_back(28);
  return m;
}

CsiFrame::CsiFrame(std::size_t antennas, std::vector<int> subcarrier_indices)
    : antennas_(antennas),
      indices_(std::move(subcarrier_indices)),
      magnitude_(antennas_ * indices_.size()),
      phase_(antennas_ * indices_.size()) {
  check_indices(indices_);
}

CsiFrame::CsiFrame(std::size_t antennas, std::vector<int> subcarrier_indices,
                   std::span<const Complex> values)
    : CsiFrame(antennas, std::move(subcarrier_indices)) {
  if (values.size() != magnitude_.size()) {
    throw ShapeError("CsiFrame: expected " + std::to_string(magnitude_.size()) +
                     " values, got " + std::to_string(values.size()));
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    magnitude_[k] = std::abs(values[k]);
    phase_[k] = std::arg(values[k]);
  }
}

std::vector<Complex> CsiFrame::values() const {
  std::vector<Complex> out(magnitude_.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::polar(magnitude_[k], phase_[k]);
  return out;
}

CsiSample::CsiSample(Tensor amplitude_in, Tensor phase_raw_in, std::optional<int> label_in,
                     double rate)
    : amplitude(std::move(amplitude_in)),
      phase_raw(std::move(phase_raw_in)),
      label(label_in),
      sample_rate_hz(rate) {
  if (amplitude.rank() != 2 || amplitude.shape() != phase_raw.shape()) {
    throw ShapeError("CsiSample: amplitude " + shape_string(amplitude.shape()) + " and phase " +
                     shape_string(phase_raw.shape()) + " must be equal rank-2 shapes");
  }
}

Tensor extract_amplitude(const CsiFrame& frame) {
  const auto mags = frame.magnitudes();
  return Tensor({frame.antennas(), frame.subcarriers()}, std::vector<double>(mags.begin(), mags.end()));
}

Tensor extract_phase(const CsiFrame& frame) {
  Tensor out({frame.antennas(), frame.subcarriers()});
  const auto phases = frame.phases();
  for (std::size_t i = 0; i < phases.size(); ++i) {
    double p = std::remainder(phases[i], kTwoPi);
    // remainder yields [-pi, pi]; fold -pi onto pi for the half-open interval.
    if (p <= -std::numbers::pi) p = std::numbers::pi;
    out[i] = p;
  }
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> row) {
  std::vector<double> out(row.begin(), row.end());
  for (std::size_t i = 1; i < row.size(); ++i) {
    double diff = row[i] - row[i - 1];
    diff -= kTwoPi * std::ceil((diff - std::numbers::pi) / kTwoPi);
    out[i] = out[i - 1] + diff;
  }
  return out;
}

SanitizationFit fit_linear_phase(std::span<const double> unwrapped, std::span<const int> indices) {
  if (unwrapped.size() != indices.size()) {
    throw InvalidInput("fit_linear_phase: " + std::to_string(unwrapped.size()) +
                       " phases vs " + std::to_string(indices.size()) + " indices");
  }
  if (unwrapped.size() < 2) throw InvalidInput("fit_linear_phase: need at least 2 points");
  check_indices(indices);

  const std::size_t last = unwrapped.size() - 1;
  SanitizationFit fit;
  fit.slope = (unwrapped[last] - unwrapped[0]) / static_cast<double>(indices[last] - indices[0]);

  double phase_sum = 0.0;
  double index_sum = 0.0;
  for (std::size_t i = 0; i < unwrapped.size(); ++i) {
    phase_sum += unwrapped[i];
    index_sum += indices[i];
  }
  const auto n = static_cast<double>(unwrapped.size());
  fit.offset = phase_sum / n - fit.slope * (index_sum / n);
  return fit;
}

std::vector<double> sanitize_row(std::span<const double> unwrapped, std::span<const int> indices) {
  const SanitizationFit fit = fit_linear_phase(unwrapped, indices);
  std::vector<double> out(unwrapped.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = unwrapped[i] - fit.slope * indices[i] - fit.offset;
  }
  return out;
}

CsiSample sanitize_sample(const CsiSample& sample, std::size_t antennas,
                          std::size_t subcarriers_per_antenna, std::span<const int> indices) {
  const std::size_t channels = antennas * subcarriers_per_antenna;
  if (sample.phase_raw.rank() != 2 || sample.phase_raw.dim(1) != channels) {
    throw ShapeError("sanitize_sample: phase shape " + shape_string(sample.phase_raw.shape()) +
                     " does not match " + std::to_string(antennas) + " antennas x " +
                     std::to_string(subcarriers_per_antenna) + " subcarriers");
  }
  if (indices.size() != subcarriers_per_antenna) {
    throw InvalidInput("sanitize_sample: " + std::to_string(indices.size()) +
                       " subcarrier indices for " + std::to_string(subcarriers_per_antenna) +
                       " subcarriers");
  }

  CsiSample out = sample;
  Tensor sanitized(sample.phase_raw.shape());
  const std::size_t rows = sample.phase_raw.dim(0);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t a = 0; a < antennas; ++a) {
      const std::size_t base = t * channels + a * subcarriers_per_antenna;
      const auto row = sample.phase_raw.data().subspan(base, subcarriers_per_antenna);
      const auto clean = sanitize_row(unwrap_phase(row), indices);
      std::copy(clean.begin(), clean.end(),
                sanitized.data().begin() + static_cast<std::ptrdiff_t>(base));
    }
  }
  out.phase_sanitized_ = std::move(sanitized);
  return out;
}

}  // namespace autosen::csi
