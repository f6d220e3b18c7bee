#pragma once

// File-backed run configuration for the autosen CLI (JSON document).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autosen/data/dataset.hpp"
#include "autosen/model/experiment.hpp"
#include "autosen/synth/channel.hpp"

namespace autosen::cli {

/// Raised for malformed config files, unknown keys and invalid values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthSettings {
  std::size_t classes = 3;
  std::size_t per_class = 90;
  std::size_t unlabeled = 200;
  std::size_t duration_packets = 500;
  bool sanitize = true;
  /// Moderate hardware offsets; sanitization removes them from the phase.
  synth::OffsetDistribution offsets{{-200.0, 200.0}, {-20.0, 20.0}, 50e-9};
};

struct CsvSettings {
  data::CsvLayout layout;
  double source_rate_hz = 1000.0;
  std::size_t downsample_factor = 2;
  data::WindowSpec window;
  /// Extra unlabelled random segments drawn from each manifest recording.
  std::size_t unlabeled_segments_per_file = 0;
};

struct PathSettings {
  std::filesystem::path out = "autosen_out";
  std::filesystem::path data_in;   // CSV recording or cache to ingest (sanitize)
  std::filesystem::path manifest;  // labelled CSV manifest (sanitize)
  std::filesystem::path cache = "dataset.cache";
  std::filesystem::path checkpoints = "checkpoints";
  std::filesystem::path metrics = "metrics";

  /// `p` resolved against `out` unless absolute.
  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

struct AblationSettings {
  std::vector<model::Mode> modes{model::kAllModes.begin(), model::kAllModes.end()};
  std::vector<std::size_t> shots{10, 20};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::size_t> latent_sizes{128, 256, 512};
  model::FullSupPool fullsup_pool = model::FullSupPool::kFewShot;
};

struct RunConfig {
  std::uint64_t seed = 0;
  /// 0 infers the class count from the largest label in the data.
  std::size_t num_classes = 0;
  model::TrainConfig train;
  synth::ChannelConfig channel;
  SynthSettings synth;
  CsvSettings csv;
  data::SplitSpec split;
  PathSettings paths;
  AblationSettings ablation;

  /// Pushes the master seed into every seed-bearing sub-config.
  void apply_seed(std::uint64_t s);
  void validate() const;
};

/// Parses a JSON document; absent keys keep their defaults, unknown keys throw.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Serialises every field (useful as a template and for provenance).
std::string dump_config(const RunConfig& cfg);

}  // namespace autosen::cli
