#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "autosen/csi/csi.hpp"
#include "autosen/error.hpp"
#include "autosen/model/experiment.hpp"
#include "oracles.hpp"

using namespace autosen;
using namespace autosen::model;

namespace {

csi::CsiSample sample(std::uint64_t seed, std::optional<int> label) {
  csi::CsiSample s(oracle::random_tensor({500, 90}, seed, 1.0),
                   oracle::random_tensor({500, 90}, seed + 500, 3.0), label, 500.0);
  return csi::sanitize_sample(s, 3, 30, csi::intel5300_subcarrier_indices());
}

struct TinyData {
  std::vector<csi::CsiSample> unlabeled;
  std::vector<csi::CsiSample> labeled;
};

const TinyData& tiny_data() {
  static const TinyData data = [] {
    TinyData d;
    for (std::uint64_t i = 0; i < 2; ++i) d.unlabeled.push_back(sample(i, std::nullopt));
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 4; ++i) d.labeled.push_back(sample(100 + 10 * c + i, c));
    }
    return d;
  }();
  return data;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST(Ablation, AllModesTwoShotsOneSeed) {
  AblationGrid grid;
  grid.shots = {1, 2};
  grid.eval_per_class = 2;
  const auto table = run_ablation(tiny_data().unlabeled, tiny_data().labeled, grid, tiny_config(), 2);
  ASSERT_EQ(table.runs.size(), 10u);
  ASSERT_EQ(table.summaries.size(), 5u);
  for (const auto& r : table.runs) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_EQ(r.per_class_accuracy.size(), 2u);
    EXPECT_EQ(r.pretrain_losses.empty(), r.mode == "fullsup");
  }
  const auto& ref = table.summaries.front();
  EXPECT_EQ(ref.mode, Mode::kCrossModal);
  ASSERT_TRUE(ref.delta.has_value());
  EXPECT_EQ(*ref.delta, 0.0);
  for (const auto& s : table.summaries) {
    ASSERT_EQ(s.accuracy_per_shot.size(), 2u);
    EXPECT_DOUBLE_EQ(s.average, 0.5 * (s.accuracy_per_shot[0] + s.accuracy_per_shot[1]));
    EXPECT_DOUBLE_EQ(*s.delta, s.average - ref.average);
  }
  // Encoder + classifier size is the same for every single-channel mode.
  const auto params = [](const RunMetrics& r) { return r.encoder_params + r.classifier_params; };
  for (const auto& r : table.runs) {
    if (r.mode != "concat") EXPECT_EQ(params(r), params(table.runs.front()));
  }
}

TEST(Ablation, LatentSweepHasThreeRows) {
  AblationGrid grid;
  grid.modes = {Mode::kCrossModal};
  grid.shots = {1};
  grid.eval_per_class = 2;
  grid.latent_sizes = {128, 256, 512};
  const auto table = run_ablation(tiny_data().unlabeled, tiny_data().labeled, grid, tiny_config(), 2);
  ASSERT_EQ(table.summaries.size(), 3u);
  EXPECT_EQ(table.summaries[0].latent, 128u);
  EXPECT_EQ(table.summaries[2].latent, 512u);
  EXPECT_EQ(*table.summaries[1].delta, 0.0);
  const auto text = format_table(table);
  EXPECT_NE(text.find("1-shots"), std::string::npos);
  EXPECT_EQ(count_lines(text), 4u);
}

TEST(Ablation, DeterministicAndValidated) {
  AblationGrid grid;
  grid.modes = {Mode::kAmpOnly, Mode::kFullSup};
  grid.shots = {1};
  grid.eval_per_class = 2;
  grid.fullsup_pool = FullSupPool::kAllTraining;
  const auto a = run_ablation(tiny_data().unlabeled, tiny_data().labeled, grid, tiny_config(), 2);
  const auto b = run_ablation(tiny_data().unlabeled, tiny_data().labeled, grid, tiny_config(), 2);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].accuracy, b.runs[i].accuracy);
    EXPECT_EQ(a.runs[i].classifier_losses, b.runs[i].classifier_losses);
  }
  // No cross-modal row, so there is nothing to take a Delta against.
  EXPECT_FALSE(a.summaries.front().delta.has_value());

  grid.seeds.clear();
  EXPECT_THROW(run_ablation(tiny_data().unlabeled, tiny_data().labeled, grid, tiny_config(), 2),
               InvalidInput);
  grid.seeds = {0};
  EXPECT_THROW(run_ablation({}, tiny_data().labeled, grid, tiny_config(), 2), InvalidInput);
}

TEST(Summaries, MeansOverSeedsAndDelta) {
  std::vector<RunMetrics> runs;
  const auto add = [&](std::string mode, std::size_t shots, std::uint64_t seed, double acc) {
    RunMetrics r;
    r.mode = std::move(mode);
    r.shots = shots;
    r.latent = 256;
    r.seed = seed;
    r.accuracy = acc;
    runs.push_back(r);
  };
  add("cross-modal", 10, 0, 0.70);
  add("cross-modal", 20, 0, 0.80);
  add("cross-modal", 10, 1, 0.72);
  add("cross-modal", 20, 1, 0.78);
  add("amp-only", 10, 0, 0.60);
  add("amp-only", 20, 0, 0.70);
  const auto s = summarize(runs, {10, 20}, 256);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_NEAR(s[0].accuracy_per_shot[0], 0.71, 1e-15);
  EXPECT_NEAR(s[0].average, 0.75, 1e-15);
  EXPECT_NEAR(*s[1].delta, -0.10, 1e-15);
}

TEST(MetricsFiles, CsvAndJsonExport) {
  RunMetrics r;
  r.mode = "cross-modal";
  r.shots = 10;
  r.latent = 256;
  r.seed = 3;
  r.accuracy = 0.1;
  r.pretrain_losses = {1.0 / 3.0, 0.25};
  r.classifier_losses = {0.5};
  r.per_class_accuracy = {0.0, 0.2};
  const auto dir = std::filesystem::temp_directory_path() / "autosen_experiment_test";
  std::filesystem::create_directories(dir);
  const std::vector<RunMetrics> runs{r, r};
  write_metrics_csv(runs, dir / "runs.csv");
  write_metrics_json(runs, dir / "runs.json");
  const auto csv = slurp(dir / "runs.csv");
  EXPECT_EQ(count_lines(csv), 3u);
  EXPECT_EQ(csv.substr(0, csv.find(',')), "mode");
  EXPECT_NE(csv.find("0.3333333333333333;0.25"), std::string::npos);
  const auto json = nlohmann::json::parse(slurp(dir / "runs.json"));
  ASSERT_EQ(json.size(), 2u);
  EXPECT_EQ(json[0]["pretrain_losses"][0].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(json[1]["seed"].get<int>(), 3);

  AblationTable table;
  table.shots = {10};
  table.runs = runs;
  table.summaries = summarize(table.runs, table.shots, 256);
  write_summary_csv(table, dir / "table.csv");
  write_summary_json(table, dir / "table.json");
  EXPECT_EQ(slurp(dir / "table.csv"), "mode,latent,acc_10shot,avg,delta\ncross-modal,256,0.1,0.1,0\n");
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "table.json"))["rows"][0]["delta"].get<double>(), 0.0);
  EXPECT_THROW(write_metrics_csv(runs, "/nonexistent/dir/runs.csv"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(MetricsFiles, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}
