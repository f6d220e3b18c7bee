#pragma once

// CSI containers, amplitude/phase extraction and linear phase sanitization.
//
// Flattened channel layout used everywhere in this project: channel
// d = a * K + i for antenna a and subcarrier slot i (antenna-major).

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "autosen/tensor.hpp"

namespace autosen::data {
class CacheReader;
}

namespace autosen::csi {

using Complex = std::complex<double>;

/// The 30 grouped subcarrier indices reported by the Intel 5300 in HT20 mode.
std::vector<int> intel5300_subcarrier_indices();

/// One packet: complex channel per (antenna, subcarrier slot).
///
/// Stored in polar form so that phase rotations (offset injection) leave the
/// modulus bit-identical. Phases are kept unwrapped internally; extract_phase
/// folds them to the principal value.
class CsiFrame {
 public:
  CsiFrame(std::size_t antennas, std::vector<int> subcarrier_indices);
  CsiFrame(std::size_t antennas, std::vector<int> subcarrier_indices,
           std::span<const Complex> values);

  std::size_t antennas() const noexcept { return antennas_; }
  std::size_t subcarriers() const noexcept { return indices_.size(); }
  const std::vector<int>& subcarrier_indices() const noexcept { return indices_; }

  Complex value(std::size_t antenna, std::size_t slot) const {
    const std::size_t k = antenna * subcarriers() + slot;
    return std::polar(magnitude_[k], phase_[k]);
  }
  void set_value(std::size_t antenna, std::size_t slot, Complex v) {
    const std::size_t k = antenna * subcarriers() + slot;
    magnitude_[k] = std::abs(v);
    phase_[k] = std::arg(v);
  }
  /// Adds `radians` to the phase; the modulus is not touched.
  void rotate(std::size_t antenna, std::size_t slot, double radians) {
    phase_[antenna * subcarriers() + slot] += radians;
  }

  std::span<const double> magnitudes() const noexcept { return magnitude_; }
  std::span<const double> phases() const noexcept { return phase_; }
  std::vector<Complex> values() const;

  friend bool operator==(const CsiFrame&, const CsiFrame&) = default;

 private:
  std::size_t antennas_;
  std::vector<int> indices_;
  std::vector<double> magnitude_;
  std::vector<double> phase_;
};

/// Linear phase model parameters: phase(m) ~ slope * m + offset.
struct SanitizationFit {
  double slope = 0.0;   // radians per subcarrier index
  double offset = 0.0;  // radians
};

/// One activity window of T packets over D = A*K flattened channels.
class CsiSample {
 public:
  Tensor amplitude;  // (T x D)
  Tensor phase_raw;  // (T x D), radians
  std::optional<int> label;
  double sample_rate_hz = 0.0;

  CsiSample() = default;
  CsiSample(Tensor amplitude, Tensor phase_raw, std::optional<int> label, double sample_rate_hz);

  std::size_t timestamps() const { return amplitude.dim(0); }
  std::size_t channels() const { return amplitude.dim(1); }

  /// Present only on samples returned by sanitize_sample (or read back from a cache).
  const std::optional<Tensor>& phase_sanitized() const noexcept { return phase_sanitized_; }

  friend bool operator==(const CsiSample&, const CsiSample&) = default;

 private:
  std::optional<Tensor> phase_sanitized_;

  friend CsiSample sanitize_sample(const CsiSample&, std::size_t, std::size_t, std::span<const int>);
  friend class autosen::data::CacheReader;
};

/// |H| per (antenna, subcarrier), shape (A x K).
Tensor extract_amplitude(const CsiFrame& frame);

/// Principal-value arg(H) in (-pi, pi] per (antenna, subcarrier), shape (A x K).
Tensor extract_phase(const CsiFrame& frame);

/// Removes 2*pi jumps so successive differences are in (-pi, pi]. output[0] == input[0].
std::vector<double> unwrap_phase(std::span<const double> row);

/// Endpoint slope and mean-matched offset. Throws InvalidInput for fewer than two
/// points, mismatched lengths or indices that are not strictly increasing.
SanitizationFit fit_linear_phase(std::span<const double> unwrapped, std::span<const int> indices);

/// unwrapped[i] - slope * m_i - offset with the fit from fit_linear_phase. Zero mean.
std::vector<double> sanitize_row(std::span<const double> unwrapped, std::span<const int> indices);

/// Unwraps and sanitizes every (timestamp, antenna) row of phase_raw independently.
/// Returns a copy carrying phase_sanitized; amplitude is copied unchanged.
CsiSample sanitize_sample(const CsiSample& sample, std::size_t antennas,
                          std::size_t subcarriers_per_antenna, std::span<const int> indices);

}  // namespace autosen::csi
