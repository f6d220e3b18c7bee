#pragma once

// Multipath CSI synthesis:
//   H(n, a, i) = sum_p g_pa * A_p(t_n) * exp(j*2*pi*(f_c + m_i*df)*tau_p(t_n) + j*theta_a)
// with t_n = n / packet_rate, plus timing/frequency offset injection and a
// labelled activity generator built on top.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "autosen/csi/csi.hpp"
#include "autosen/random.hpp"

namespace autosen::synth {

/// One propagation path: time-varying gain and delay (seconds).
struct PathSpec {
  std::function<double(double)> amplitude;
  std::function<double(double)> delay;
  /// Per-antenna gain multipliers; empty means 1 for every antenna.
  std::vector<double> antenna_gains;
};

struct ChannelConfig {
  double carrier_hz = 5.32e9;
  double subcarrier_spacing_hz = 312.5e3;
  std::vector<int> subcarrier_indices = csi::intel5300_subcarrier_indices();
  std::size_t antennas = 3;
  double packet_rate_hz = 500.0;
  std::vector<double> antenna_phase_shifts = {0.0, 0.9, 2.1};
  /// Standard deviation of additive circular complex Gaussian noise (per component).
  double noise_std = 0.0;
  /// Std-dev (radians) of independent per-entry receiver phase jitter; rotates
  /// only, so amplitudes are unaffected. Off by default.
  double phase_noise_std = 0.0;

  std::size_t subcarriers() const noexcept { return subcarrier_indices.size(); }
  std::size_t channels() const noexcept { return antennas * subcarrier_indices.size(); }
  void validate() const;
};

/// Hardware offsets: carrier frequency offset, sampling frequency offset and
/// packet detection delay. pdd_seconds: empty = none, one value = constant,
/// otherwise one value per packet.
struct OffsetSpec {
  double cfo_hz = 0.0;
  double sfo_ppm = 0.0;
  std::vector<double> pdd_seconds;

  bool is_zero() const noexcept;
  double pdd_at(std::size_t packet) const;
};

std::vector<csi::CsiFrame> synthesize_frames(const std::vector<PathSpec>& paths,
                                             const ChannelConfig& cfg, std::size_t packets,
                                             std::uint64_t seed);

/// Multiplies frame n, subcarrier i by
/// exp(j*(2*pi*cfo*t_n + 2*pi*(f_c + m_i*df)*pdd_n + 2*pi*m_i*df*sfo*1e-6/packet_rate)).
/// The SFO term is the sampling drift over one packet interval; receivers
/// re-acquire timing at each packet, so it does not grow with t_n.
/// Amplitudes are untouched bit-for-bit.
std::vector<csi::CsiFrame> inject_offsets(std::vector<csi::CsiFrame> frames,
                                          const OffsetSpec& spec, const ChannelConfig& cfg);

/// Flattens frames into (T x A*K) amplitude and raw-phase tensors.
csi::CsiSample frames_to_sample(const std::vector<csi::CsiFrame>& frames, std::optional<int> label,
                                double sample_rate_hz);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double draw(Rng& rng) const { return rng.uniform(lo, hi); }
};

/// Randomised path family. Per sample the generator draws
///   A(t)   = base_amplitude * (1 + amplitude_swing * sin(2*pi*amplitude_rate*t + phi_a))
///   tau(t) = base_delay + delay_swing * sin(2*pi*delay_rate*t + phi_d)
/// with every parameter uniform in its range and random phases phi.
struct PathGenerator {
  Range base_amplitude{1.0, 1.0};
  Range amplitude_swing{0.0, 0.0};  // fraction of base, must stay within [0, 1]
  Range amplitude_rate_hz{0.0, 0.0};
  Range base_delay_s{0.0, 0.0};
  Range delay_swing_s{0.0, 0.0};
  Range delay_rate_hz{0.0, 0.0};
  Range antenna_gain{1.0, 1.0};

  PathSpec draw(Rng& rng, std::size_t antennas) const;
};

struct ActivityClassSpec {
  int class_id = 0;
  std::vector<PathGenerator> paths;
  std::size_t duration_packets = 500;
};

/// Per-sample offset draw for dataset generation: CFO and SFO uniform in
/// their ranges, PDD drawn independently per packet from [0, pdd_max_s].
struct OffsetDistribution {
  Range cfo_hz{0.0, 0.0};
  Range sfo_ppm{0.0, 0.0};
  double pdd_max_s = 0.0;

  OffsetSpec draw(Rng& rng, std::size_t packets) const;
  bool is_zero() const noexcept;
};

/// Near-constant line-of-sight and wall paths plus one moving reflector. Class c
/// places the reflector at [35 + 40c, 45 + 40c] ns and oscillates it at
/// [0.6 + 1.4c, 1.2 + 1.4c] Hz.
std::vector<ActivityClassSpec> default_activity_classes(std::size_t count,
                                                       std::size_t duration_packets = 500);

/// per_class samples for every class, class-major order, deterministic in seed.
/// Each sample uses its own seed-derived stream.
std::vector<csi::CsiSample> generate_activity_dataset(const std::vector<ActivityClassSpec>& classes,
                                                      std::size_t per_class,
                                                      const ChannelConfig& cfg,
                                                      const OffsetDistribution& offsets,
                                                      std::uint64_t seed);

}  // namespace autosen::synth
