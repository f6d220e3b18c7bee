#pragma once

// Metrics records, the modality/latent ablation grid and CSV/JSON export.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autosen/model/autosen.hpp"

namespace autosen::model {

/// One trained-and-evaluated configuration.
struct RunMetrics {
  std::string mode;
  std::size_t shots = 0;
  std::size_t latent = 0;
  std::uint64_t seed = 0;
  std::vector<double> pretrain_losses;    // empty for fullsup
  std::vector<double> classifier_losses;  // few-shot or end-to-end CE per epoch
  double accuracy = 0.0;                  // top-1, in [0, 1]
  std::vector<double> per_class_accuracy;
  std::size_t encoder_params = 0;
  std::size_t classifier_params = 0;
};

/// Full Supervision training pool: the few-shot pool only, or every labelled
/// sample not held out for evaluation.
enum class FullSupPool { kFewShot, kAllTraining };

struct AblationGrid {
  std::vector<Mode> modes{kAllModes.begin(), kAllModes.end()};
  std::vector<std::size_t> shots{10, 20};
  std::vector<std::uint64_t> seeds{0};
  std::vector<std::size_t> latent_sizes{256};
  std::size_t eval_per_class = 70;
  /// Latent size of the cross-modal row that Delta is measured against; when
  /// absent from the grid the first latent size is used.
  std::size_t reference_latent = 256;
  FullSupPool fullsup_pool = FullSupPool::kFewShot;
};

/// Seed-averaged accuracy for one (mode, latent) row.
struct AblationSummary {
  Mode mode = Mode::kCrossModal;
  std::size_t latent = 0;
  std::vector<double> accuracy_per_shot;  // aligned with AblationTable::shots
  double average = 0.0;                   // arithmetic mean over shot settings
  std::optional<double> delta;            // average - reference cross-modal average
};

struct AblationTable {
  std::vector<std::size_t> shots;
  std::vector<RunMetrics> runs;
  std::vector<AblationSummary> summaries;
};

using ProgressCallback = std::function<void(const std::string& message)>;

/// Pretrains once per (mode, latent, seed), then calibrates and evaluates for
/// every shot setting. Few-shot/eval splits come from make_split with the run
/// seed, so every mode sees identical splits. Rows are emitted in grid order
/// (mode, latent, seed, shots).
AblationTable run_ablation(std::span<const csi::CsiSample> unlabeled,
                           std::span<const csi::CsiSample> labeled, const AblationGrid& grid,
                           const TrainConfig& base, std::size_t num_classes,
                           const ProgressCallback& progress = {});

/// Rebuilds per-row summaries and Deltas from `table.runs`.
std::vector<AblationSummary> summarize(const std::vector<RunMetrics>& runs,
                                       const std::vector<std::size_t>& shots,
                                       std::size_t reference_latent);

/// Text rendering: Mode | Latent | <k>-shots... | Avg | Delta, in percent.
std::string format_table(const AblationTable& table);

void write_metrics_csv(std::span<const RunMetrics> runs, const std::filesystem::path& path);
void write_metrics_json(std::span<const RunMetrics> runs, const std::filesystem::path& path);
void write_summary_csv(const AblationTable& table, const std::filesystem::path& path);
void write_summary_json(const AblationTable& table, const std::filesystem::path& path);

/// Exact decimal rendering used in every metrics file (round-trips doubles).
std::string format_double(double value);

}  // namespace autosen::model
