#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "autosen/csi/csi.hpp"
#include "autosen/error.hpp"
#include "autosen/synth/channel.hpp"
#include "oracles.hpp"

using namespace autosen;
using synth::ChannelConfig;
using synth::PathSpec;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PathSpec constant_path(double amplitude, double delay) {
  return {[=](double) { return amplitude; }, [=](double) { return delay; }, {}};
}

ChannelConfig no_shift_config() {
  ChannelConfig cfg;
  cfg.antenna_phase_shifts = {0.0, 0.0, 0.0};
  return cfg;
}

std::vector<PathSpec> moving_paths() {
  return {constant_path(1.0, 15e-9),
          {[](double t) { return 0.5 * (1.0 + 0.2 * std::sin(kTwoPi * 1.3 * t)); },
           [](double t) { return 28e-9 + 0.8e-9 * std::sin(kTwoPi * 0.9 * t + 0.4); },
           {0.9, 1.1, 1.0}},
          constant_path(0.4, 38e-9)};
}

// Sanitized phase of a frame sequence, via the sample path used everywhere else.
Tensor sanitized(const std::vector<csi::CsiFrame>& frames, const ChannelConfig& cfg) {
  const auto s = synth::frames_to_sample(frames, std::nullopt, cfg.packet_rate_hz);
  return *csi::sanitize_sample(s, cfg.antennas, cfg.subcarriers(), cfg.subcarrier_indices)
              .phase_sanitized();
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST(Synthesize, ZeroDelayUnitPathIsOne) {
  const auto frames = synth::synthesize_frames({constant_path(1.0, 0.0)}, no_shift_config(), 5, 0);
  ASSERT_EQ(frames.size(), 5u);
  for (const auto& f : frames) {
    for (const auto& v : f.values()) {
      EXPECT_NEAR(v.real(), 1.0, 1e-15);
      EXPECT_NEAR(v.imag(), 0.0, 1e-15);
    }
  }
}

TEST(Synthesize, ConstantDelayPhaseSlope) {
  const double tau = 23e-9;
  const auto cfg = no_shift_config();
  const auto frames = synth::synthesize_frames({constant_path(1.0, tau)}, cfg, 3, 0);
  const auto& m = cfg.subcarrier_indices;
  for (const auto& f : frames) {
    const Tensor amp = csi::extract_amplitude(f);
    for (double v : amp.data()) EXPECT_NEAR(v, 1.0, 1e-12);
    const Tensor pha = csi::extract_phase(f);
    for (std::size_t i = 1; i < m.size(); ++i) {
      const double step = pha.at(0, i) - pha.at(0, i - 1);
      const double expected = kTwoPi * cfg.subcarrier_spacing_hz * tau * (m[i] - m[i - 1]);
      EXPECT_NEAR(std::remainder(step - expected, kTwoPi), 0.0, 1e-6);
    }
  }
}

TEST(Synthesize, DestructiveInterference) {
  auto cfg = no_shift_config();
  const double f0 = cfg.carrier_hz + cfg.subcarrier_spacing_hz * cfg.subcarrier_indices[0];
  const double half_period = 0.5 / f0;
  const auto frames = synth::synthesize_frames(
      {constant_path(1.0, 0.0), constant_path(1.0, half_period)}, cfg, 1, 0);
  EXPECT_NEAR(std::abs(frames[0].value(0, 0)), 0.0, 1e-9);
  EXPECT_GT(std::abs(frames[0].value(0, 29)), 1e-3);
}

TEST(Synthesize, AntennaPhaseShift) {
  ChannelConfig cfg;
  const auto frames = synth::synthesize_frames({constant_path(1.0, 0.0)}, cfg, 1, 0);
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_NEAR(std::arg(frames[0].value(a, 4)), cfg.antenna_phase_shifts[a], 1e-12);
  }
}

TEST(Synthesize, TriangleInequality) {
  ChannelConfig cfg;
  const auto paths = moving_paths();
  const auto frames = synth::synthesize_frames(paths, cfg, 200, 0);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const double t = n / cfg.packet_rate_hz;
    double bound = 0.0;
    for (const auto& p : paths) {
      const double g = p.antenna_gains.empty() ? 1.0 : 1.1;
      bound += g * p.amplitude(t);
    }
    for (double v : frames[n].magnitudes()) EXPECT_LE(v, bound + 1e-12);
  }
}

TEST(Synthesize, Errors) {
  ChannelConfig cfg;
  EXPECT_THROW(synth::synthesize_frames({}, cfg, 3, 0), InvalidInput);
  EXPECT_THROW(synth::synthesize_frames({constant_path(-1.0, 0.0)}, cfg, 3, 0), InvalidInput);
  cfg.packet_rate_hz = 0.0;
  EXPECT_THROW(synth::synthesize_frames({constant_path(1.0, 0.0)}, cfg, 3, 0), InvalidInput);
}

TEST(Synthesize, NoiseKnobIsSeededAndOffByDefault) {
  ChannelConfig cfg;
  const auto clean_a = synth::synthesize_frames(moving_paths(), cfg, 20, 1);
  const auto clean_b = synth::synthesize_frames(moving_paths(), cfg, 20, 2);
  EXPECT_EQ(clean_a, clean_b);
  cfg.noise_std = 0.05;
  const auto noisy_a = synth::synthesize_frames(moving_paths(), cfg, 20, 1);
  const auto noisy_b = synth::synthesize_frames(moving_paths(), cfg, 20, 1);
  const auto noisy_c = synth::synthesize_frames(moving_paths(), cfg, 20, 2);
  EXPECT_EQ(noisy_a, noisy_b);
  EXPECT_NE(noisy_a, noisy_c);
  EXPECT_NE(noisy_a, clean_a);
}

TEST(Offsets, ZeroSpecIsBitExact) {
  ChannelConfig cfg;
  const auto frames = synth::synthesize_frames(moving_paths(), cfg, 50, 0);
  const auto out = synth::inject_offsets(frames, {}, cfg);
  EXPECT_EQ(out, frames);
}

TEST(Offsets, AmplitudesNeverChange) {
  ChannelConfig cfg;
  const auto frames = synth::synthesize_frames(moving_paths(), cfg, 50, 0);
  synth::OffsetSpec spec{137.0, 12.0, {31e-9}};
  const auto out = synth::inject_offsets(frames, spec, cfg);
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const auto a = frames[n].magnitudes();
    const auto b = out[n].magnitudes();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Offsets, PurePddIsLinearAndSanitizedAway) {
  ChannelConfig cfg;
  const auto clean = synth::synthesize_frames(moving_paths(), cfg, 100, 0);
  synth::OffsetSpec spec;
  Rng rng(3);
  for (int n = 0; n < 100; ++n) spec.pdd_seconds.push_back(rng.uniform(0.0, 60e-9));
  const auto shifted = synth::inject_offsets(clean, spec, cfg);
  const auto& m = cfg.subcarrier_indices;
  // Phase difference to the clean frame is linear in m_i.
  for (std::size_t n = 0; n < 100; n += 17) {
    std::vector<double> delta(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      delta[i] = shifted[n].phases()[i] - clean[n].phases()[i];
    }
    const auto residual = oracle::endpoint_residual(delta, m);
    for (double r : residual) EXPECT_NEAR(r, 0.0, 1e-6);
  }
  EXPECT_LT(max_abs_diff(sanitized(shifted, cfg), sanitized(clean, cfg)), 1e-6);
}

TEST(Offsets, PureCfoAdvancesLinearlyInTime) {
  ChannelConfig cfg;
  const double cfo = 37.0;
  const auto clean = synth::synthesize_frames({constant_path(1.0, 12e-9)}, cfg, 40, 0);
  const auto out = synth::inject_offsets(clean, {cfo, 0.0, {}}, cfg);
  const double expected = kTwoPi * cfo / cfg.packet_rate_hz;
  for (std::size_t n = 1; n < out.size(); ++n) {
    const double step = std::arg(out[n].value(1, 7) * std::conj(out[n - 1].value(1, 7)));
    EXPECT_NEAR(step, expected, 1e-9);
    EXPECT_EQ(out[n].magnitudes()[37], clean[n].magnitudes()[37]);
  }
}

TEST(Offsets, CombinedOffsetsSanitizedAway) {
  ChannelConfig cfg;
  synth::OffsetDistribution dist{{-200.0, 200.0}, {-20.0, 20.0}, 50e-9};
  Rng rng(8);
  for (const auto& cls : synth::default_activity_classes(3)) {
    for (int draw = 0; draw < 3; ++draw) {
      std::vector<PathSpec> paths;
      for (const auto& gen : cls.paths) paths.push_back(gen.draw(rng, cfg.antennas));
      const auto clean = synth::synthesize_frames(paths, cfg, 500, 0);
      const auto shifted = synth::inject_offsets(clean, dist.draw(rng, 500), cfg);
      EXPECT_LT(max_abs_diff(sanitized(shifted, cfg), sanitized(clean, cfg)), 1e-6)
          << "class " << cls.class_id << " draw " << draw;
    }
  }
}

TEST(Dataset, CountsShapesAndDeterminism) {
  ChannelConfig cfg;
  const auto classes = synth::default_activity_classes(3);
  const auto a = synth::generate_activity_dataset(classes, 10, cfg, {}, 5);
  ASSERT_EQ(a.size(), 30u);
  std::map<int, int> counts;
  for (const auto& s : a) {
    ++counts[*s.label];
    EXPECT_EQ(s.amplitude.shape(), (Tensor::Shape{500, 90}));
    EXPECT_EQ(s.sample_rate_hz, 500.0);
  }
  EXPECT_EQ(counts, (std::map<int, int>{{0, 10}, {1, 10}, {2, 10}}));
  const auto b = synth::generate_activity_dataset(classes, 10, cfg, {}, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(bit_identical(a[i].amplitude, b[i].amplitude));
    EXPECT_TRUE(bit_identical(a[i].phase_raw, b[i].phase_raw));
  }
  const auto c = synth::generate_activity_dataset(classes, 10, cfg, {}, 6);
  EXPECT_FALSE(bit_identical(a[0].amplitude, c[0].amplitude));
}

TEST(Dataset, NeedsTwoClasses) {
  ChannelConfig cfg;
  auto classes = synth::default_activity_classes(2);
  classes.pop_back();
  EXPECT_THROW(synth::generate_activity_dataset(classes, 1, cfg, {}, 0), InvalidInput);
}

// Per-sample amplitude power spectrum (mean over channels) in low-frequency
// bins, then nearest class centroid. The generator is separable if this simple
// classifier beats chance on held-out samples.
TEST(Dataset, NearestCentroidOnSpectraBeatsChance) {
  ChannelConfig cfg;
  const auto classes = synth::default_activity_classes(3);
  const auto train = synth::generate_activity_dataset(classes, 12, cfg, {}, 1);
  const auto test = synth::generate_activity_dataset(classes, 12, cfg, {}, 2);
  constexpr std::size_t kBins = 6;  // 1 Hz per bin at T = 500, 500 Hz
  auto features = [&](const csi::CsiSample& s) {
    std::vector<double> f(kBins, 0.0);
    for (std::size_t d = 0; d < s.channels(); d += 7) {
      std::vector<double> x(s.timestamps());
      double mean = 0.0;
      for (std::size_t t = 0; t < x.size(); ++t) mean += x[t] = s.amplitude.at(t, d);
      mean /= x.size();
      for (auto& v : x) v -= mean;
      for (std::size_t k = 0; k < kBins; ++k) f[k] += oracle::dft_magnitude(x, k);
    }
    double norm = 0.0;
    for (double v : f) norm += v * v;
    for (auto& v : f) v /= std::sqrt(norm);
    return f;
  };
  std::vector<std::vector<double>> centroids(3, std::vector<double>(kBins, 0.0));
  for (const auto& s : train) {
    const auto f = features(s);
    for (std::size_t k = 0; k < kBins; ++k) centroids[*s.label][k] += f[k] / 12.0;
  }
  int correct = 0;
  for (const auto& s : test) {
    const auto f = features(s);
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < 3; ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < kBins; ++k) d += (f[k] - centroids[c][k]) * (f[k] - centroids[c][k]);
      if (d < best_d) best_d = d, best = c;
    }
    correct += best == *s.label;
  }
  // Chance is 12 of 36; require well above the binomial 99% upper bound (~19).
  EXPECT_GE(correct, 20) << correct << "/36";
}
