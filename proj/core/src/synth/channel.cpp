#include "autosen/synth/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "autosen/error.hpp"

namespace autosen::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.hi < r.lo) {
    throw InvalidInput(std::string("invalid range for ") + name);
  }
}

}  // namespace

void ChannelConfig::validate() const {
  if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0) || !(packet_rate_hz > 0.0)) {
    throw InvalidInput("channel config: carrier, spacing and packet rate must be positive");
  }
  if (antennas == 0) throw InvalidInput("channel config: antennas must be positive");
  if (subcarrier_indices.empty()) throw InvalidInput("channel config: no subcarrier indices");
  for (std::size_t i = 1; i < subcarrier_indices.size(); ++i) {
    if (subcarrier_indices[i] <= subcarrier_indices[i - 1]) {
      throw InvalidInput("channel config: subcarrier indices must be strictly increasing");
    }
  }
  if (antenna_phase_shifts.size() != antennas) {
    throw InvalidInput("channel config: need one antenna phase shift per antenna");
  }
  if (!(noise_std >= 0.0)) throw InvalidInput("channel config: noise_std must be >= 0");
  if (!(phase_noise_std >= 0.0)) {
    throw InvalidInput("channel config: phase_noise_std must be >= 0");
  }
}

bool OffsetSpec::is_zero() const noexcept {
  if (cfo_hz != 0.0 || sfo_ppm != 0.0) return false;
  for (double p : pdd_seconds) {
    if (p != 0.0) return false;
  }
  return true;
}

double OffsetSpec::pdd_at(std::size_t packet) const {
  if (pdd_seconds.empty()) return 0.0;
  if (pdd_seconds.size() == 1) return pdd_seconds.front();
  if (packet >= pdd_seconds.size()) {
    throw InvalidInput("offset spec: no PDD value for packet " + std::to_string(packet));
  }
  return pdd_seconds[packet];
}

std::vector<csi::CsiFrame> synthesize_frames(const std::vector<PathSpec>& paths,
                                             const ChannelConfig& cfg, std::size_t packets,
                                             std::uint64_t seed) {
  if (paths.empty()) throw InvalidInput("synthesize_frames: empty path list");
  if (packets == 0) throw InvalidInput("synthesize_frames: need at least one packet");
  cfg.validate();
  for (const auto& p : paths) {
    if (!p.amplitude || !p.delay) throw InvalidInput("synthesize_frames: path without profile");
    if (!p.antenna_gains.empty() && p.antenna_gains.size() != cfg.antennas) {
      throw InvalidInput("synthesize_frames: antenna_gains size must equal antenna count");
    }
  }

  const std::size_t slots = cfg.subcarriers();
  std::vector<double> frequencies(slots);
  for (std::size_t i = 0; i < slots; ++i) {
    frequencies[i] = cfg.carrier_hz + cfg.subcarrier_spacing_hz * cfg.subcarrier_indices[i];
  }

  Rng noise_rng(seed);
  std::vector<csi::CsiFrame> frames;
  frames.reserve(packets);
  std::vector<double> amps(paths.size());
  std::vector<double> delays(paths.size());
  for (std::size_t n = 0; n < packets; ++n) {
    const double t = static_cast<double>(n) / cfg.packet_rate_hz;
    for (std::size_t p = 0; p < paths.size(); ++p) {
      amps[p] = paths[p].amplitude(t);
      delays[p] = paths[p].delay(t);
      if (!(amps[p] >= 0.0) || !std::isfinite(amps[p]) || !std::isfinite(delays[p])) {
        throw InvalidInput("synthesize_frames: path " + std::to_string(p) +
                           " has negative or non-finite profile at t=" + std::to_string(t));
      }
    }
    csi::CsiFrame frame(cfg.antennas, cfg.subcarrier_indices);
    for (std::size_t a = 0; a < cfg.antennas; ++a) {
      const csi::Complex rotation = std::polar(1.0, cfg.antenna_phase_shifts[a]);
      for (std::size_t i = 0; i < slots; ++i) {
        csi::Complex h{0.0, 0.0};
        for (std::size_t p = 0; p < paths.size(); ++p) {
          const double gain = paths[p].antenna_gains.empty() ? 1.0 : paths[p].antenna_gains[a];
          h += std::polar(gain * amps[p], kTwoPi * frequencies[i] * delays[p]);
        }
        h *= rotation;
        if (cfg.noise_std > 0.0) {
          h += csi::Complex(cfg.noise_std * noise_rng.normal(), cfg.noise_std * noise_rng.normal());
        }
        frame.set_value(a, i, h);
        if (cfg.phase_noise_std > 0.0) frame.rotate(a, i, cfg.phase_noise_std * noise_rng.normal());
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<csi::CsiFrame> inject_offsets(std::vector<csi::CsiFrame> frames,
                                          const OffsetSpec& spec, const ChannelConfig& cfg) {
  if (spec.is_zero()) return frames;
  // Timing is re-acquired at every packet, so the sampling clock drift only
  // accumulates over one packet interval.
  const double sfo_delay = spec.sfo_ppm * 1e-6 / cfg.packet_rate_hz;
  for (std::size_t n = 0; n < frames.size(); ++n) {
    auto& frame = frames[n];
    const double t = static_cast<double>(n) / cfg.packet_rate_hz;
    const double pdd = spec.pdd_at(n);
    const auto& m = frame.subcarrier_indices();
    for (std::size_t i = 0; i < frame.subcarriers(); ++i) {
      const double sub_freq = cfg.subcarrier_spacing_hz * m[i];
      const double angle = kTwoPi * spec.cfo_hz * t + kTwoPi * (cfg.carrier_hz + sub_freq) * pdd +
                           kTwoPi * sub_freq * sfo_delay;
      if (angle == 0.0) continue;
      for (std::size_t a = 0; a < frame.antennas(); ++a) frame.rotate(a, i, angle);
    }
  }
  return frames;
}

csi::CsiSample frames_to_sample(const std::vector<csi::CsiFrame>& frames, std::optional<int> label,
                                double sample_rate_hz) {
  if (frames.empty()) throw InvalidInput("frames_to_sample: no frames");
  const std::size_t channels = frames.front().antennas() * frames.front().subcarriers();
  Tensor amplitude({frames.size(), channels});
  Tensor phase({frames.size(), channels});
  for (std::size_t n = 0; n < frames.size(); ++n) {
    if (frames[n].antennas() * frames[n].subcarriers() != channels) {
      throw ShapeError("frames_to_sample: frame " + std::to_string(n) + " has a different shape");
    }
    const Tensor amp = csi::extract_amplitude(frames[n]);
    const Tensor pha = csi::extract_phase(frames[n]);
    for (std::size_t d = 0; d < channels; ++d) {
      amplitude.at(n, d) = amp[d];
      phase.at(n, d) = pha[d];
    }
  }
  return csi::CsiSample(std::move(amplitude), std::move(phase), label, sample_rate_hz);
}

PathSpec PathGenerator::draw(Rng& rng, std::size_t antennas) const {
  check_range(base_amplitude, "base_amplitude");
  check_range(amplitude_swing, "amplitude_swing");
  check_range(amplitude_rate_hz, "amplitude_rate_hz");
  check_range(base_delay_s, "base_delay_s");
  check_range(delay_swing_s, "delay_swing_s");
  check_range(delay_rate_hz, "delay_rate_hz");
  check_range(antenna_gain, "antenna_gain");
  if (base_amplitude.lo < 0.0 || amplitude_swing.lo < 0.0 || amplitude_swing.hi > 1.0 ||
      antenna_gain.lo < 0.0) {
    throw InvalidInput("path generator: amplitudes must stay non-negative");
  }

  const double a0 = base_amplitude.draw(rng);
  const double a_swing = amplitude_swing.draw(rng);
  const double a_rate = amplitude_rate_hz.draw(rng);
  const double a_phase = rng.uniform(0.0, kTwoPi);
  const double d0 = base_delay_s.draw(rng);
  const double d_swing = delay_swing_s.draw(rng);
  const double d_rate = delay_rate_hz.draw(rng);
  const double d_phase = rng.uniform(0.0, kTwoPi);

  PathSpec spec;
  spec.amplitude = [=](double t) {
    return a0 * (1.0 + a_swing * std::sin(kTwoPi * a_rate * t + a_phase));
  };
  spec.delay = [=](double t) { return d0 + d_swing * std::sin(kTwoPi * d_rate * t + d_phase); };
  spec.antenna_gains.resize(antennas);
  for (auto& g : spec.antenna_gains) g = antenna_gain.draw(rng);
  return spec;
}

OffsetSpec OffsetDistribution::draw(Rng& rng, std::size_t packets) const {
  OffsetSpec spec;
  spec.cfo_hz = cfo_hz.draw(rng);
  spec.sfo_ppm = sfo_ppm.draw(rng);
  if (pdd_max_s > 0.0) {
    spec.pdd_seconds.resize(packets);
    for (auto& p : spec.pdd_seconds) p = rng.uniform(0.0, pdd_max_s);
  }
  return spec;
}

bool OffsetDistribution::is_zero() const noexcept {
  return cfo_hz.lo == 0.0 && cfo_hz.hi == 0.0 && sfo_ppm.lo == 0.0 && sfo_ppm.hi == 0.0 &&
         pdd_max_s == 0.0;
}

std::vector<ActivityClassSpec> default_activity_classes(std::size_t count,
                                                       std::size_t duration_packets) {
  if (count < 2) throw InvalidInput("default_activity_classes: need at least 2 classes");
  std::vector<ActivityClassSpec> classes;
  classes.reserve(count);
  // One static room shared by every class: a dominant line-of-sight path and a
  // weak wall reflection whose parameters barely vary between recordings. The
  // moving body path carries the class: class c sits in its own delay band
  // [35 + 40c, 45 + 40c] ns and oscillates in its own rate band
  // [0.6 + 1.4c, 1.2 + 1.4c] Hz. The line of sight outweighs the other paths
  // combined, so |H| never fades to zero and phase rows unwrap cleanly.
  for (std::size_t c = 0; c < count; ++c) {
    const double k = static_cast<double>(c);

    PathGenerator line_of_sight;
    line_of_sight.base_amplitude = {1.0, 1.02};
    line_of_sight.base_delay_s = {15.0e-9, 15.2e-9};
    line_of_sight.antenna_gain = {0.99, 1.01};

    PathGenerator wall;
    wall.base_amplitude = {0.15, 0.16};
    wall.base_delay_s = {40.0e-9, 40.2e-9};
    wall.antenna_gain = {0.99, 1.01};

    const double rate_lo = 0.6 + 1.4 * k;
    PathGenerator body;
    body.base_amplitude = {0.4, 0.6};
    body.amplitude_swing = {0.1, 0.3};
    body.amplitude_rate_hz = {rate_lo, rate_lo + 0.6};
    body.base_delay_s = {(35.0 + 40.0 * k) * 1e-9, (45.0 + 40.0 * k) * 1e-9};
    body.delay_swing_s = {0.01e-9, 0.02e-9};
    body.delay_rate_hz = {rate_lo, rate_lo + 0.6};
    body.antenna_gain = {0.95, 1.05};

    ActivityClassSpec spec;
    spec.class_id = static_cast<int>(c);
    spec.paths = {line_of_sight, wall, body};
    spec.duration_packets = duration_packets;
    classes.push_back(std::move(spec));
  }
  return classes;
}

std::vector<csi::CsiSample> generate_activity_dataset(const std::vector<ActivityClassSpec>& classes,
                                                      std::size_t per_class,
                                                      const ChannelConfig& cfg,
                                                      const OffsetDistribution& offsets,
                                                      std::uint64_t seed) {
  if (classes.size() < 2) throw InvalidInput("generate_activity_dataset: need at least 2 classes");
  cfg.validate();
  std::vector<csi::CsiSample> samples;
  samples.reserve(classes.size() * per_class);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& spec = classes[c];
    if (spec.paths.empty()) {
      throw InvalidInput("generate_activity_dataset: class " + std::to_string(spec.class_id) +
                         " has no paths");
    }
    if (spec.duration_packets == 0) {
      throw InvalidInput("generate_activity_dataset: zero duration");
    }
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::uint64_t sample_seed = derive_seed(seed, c * 1'000'003ULL + s);
      Rng rng(sample_seed);
      std::vector<PathSpec> paths;
      paths.reserve(spec.paths.size());
      for (const auto& gen : spec.paths) paths.push_back(gen.draw(rng, cfg.antennas));
      const OffsetSpec offset = offsets.draw(rng, spec.duration_packets);
      auto frames = synthesize_frames(paths, cfg, spec.duration_packets, derive_seed(sample_seed, 1));
      frames = inject_offsets(std::move(frames), offset, cfg);
      samples.push_back(frames_to_sample(frames, spec.class_id, cfg.packet_rate_hz));
    }
  }
  return samples;
}

}  // namespace autosen::synth
