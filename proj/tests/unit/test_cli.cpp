#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "autosen/data/dataset.hpp"
#include "autosen/error.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace autosen;
using namespace autosen::cli;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("autosen_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Runs a command in-process, returning its exit code.
int run(void (*cmd)(const RunConfig&, Console), const RunConfig& cfg, std::string* out = nullptr) {
  std::ostringstream o, l;
  const int code = guarded([&] { cmd(cfg, Console{o, l}); }, Console{o, l});
  if (out) *out = o.str() + l.str();
  return code;
}

RunConfig small_config(const fs::path& out, std::size_t classes, std::size_t per_class,
                       std::size_t unlabeled) {
  RunConfig cfg;
  cfg.paths.out = out;
  cfg.synth.classes = classes;
  cfg.synth.per_class = per_class;
  cfg.synth.unlabeled = unlabeled;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 16;
  return cfg;
}

int run_binary(const std::string& args) {
  const char* bin = std::getenv("AUTOSEN_BIN");
  if (!bin) return -1;
  const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultsMatchTrainingSetup) {
  const RunConfig cfg = parse_config("{}");
  EXPECT_EQ(cfg.train.epochs, 100u);
  EXPECT_EQ(cfg.train.batch_size, 64u);
  EXPECT_EQ(cfg.train.lr, 1e-3);
  EXPECT_EQ(cfg.train.latent_size, 256u);
  EXPECT_EQ(cfg.csv.source_rate_hz / cfg.csv.downsample_factor, 500.0);
  EXPECT_EQ(cfg.split.eval_per_class, 70u);
}

TEST(Config, ParsesNestedValuesAndRoundTrips) {
  const RunConfig cfg = parse_config(R"({
    "seed": 7,
    "train": {"epochs": 3, "mode": "pha-only", "calibration_epochs": 9},
    "channel": {"phase_noise_std": 0.25},
    "synth": {"classes": 4, "offsets": {"cfo_hz": [-10, 10]}},
    "ablation": {"modes": ["amp-only", "fullsup"], "latent_sizes": [128], "fullsup_pool": "all-training"}
  })");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.train.epochs, 3u);
  EXPECT_EQ(cfg.train.mode, model::Mode::kPhaOnly);
  EXPECT_EQ(cfg.train.calibration_epochs, 9u);
  EXPECT_EQ(cfg.channel.phase_noise_std, 0.25);
  EXPECT_EQ(cfg.synth.classes, 4u);
  EXPECT_EQ(cfg.synth.offsets.cfo_hz.lo, -10.0);
  EXPECT_EQ(cfg.ablation.modes.size(), 2u);
  EXPECT_EQ(cfg.ablation.fullsup_pool, model::FullSupPool::kAllTraining);
  EXPECT_EQ(dump_config(parse_config(dump_config(cfg))), dump_config(cfg));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"trian": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epoch": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epochs": "many"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"epochs": 0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"train": {"mode": "both"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/autosen.json"), ConfigError);
}

TEST(Synth, CountsAndByteIdenticalRerun) {
  const auto dir = scratch("synth");
  RunConfig cfg = small_config(dir / "a", 3, 80, 0);
  std::string text;
  ASSERT_EQ(run(cmd_synth, cfg, &text), kExitOk);
  const auto samples = data::cache_read(dir / "a" / "dataset.cache");
  ASSERT_EQ(samples.size(), 240u);
  EXPECT_EQ(samples.front().timestamps(), 500u);
  EXPECT_EQ(samples.front().channels(), 90u);
  EXPECT_TRUE(samples.front().phase_sanitized().has_value());
  EXPECT_NE(text.find("class 2: 80"), std::string::npos) << text;

  cfg.paths.out = dir / "b";
  ASSERT_EQ(run(cmd_synth, cfg), kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "dataset.cache"), slurp(dir / "b" / "dataset.cache"));
  cfg.paths.out = dir / "c";
  cfg.apply_seed(1);
  ASSERT_EQ(run(cmd_synth, cfg), kExitOk);
  EXPECT_NE(slurp(dir / "a" / "dataset.cache"), slurp(dir / "c" / "dataset.cache"));
  fs::remove_all(dir);
}

TEST(Pipeline, FewshotReadsSeventyAndEvalReportsSevenClasses) {
  const auto dir = scratch("pipeline");
  RunConfig cfg = small_config(dir, 7, 80, 4);
  ASSERT_EQ(run(cmd_synth, cfg), kExitOk);
  ASSERT_EQ(run(cmd_pretrain, cfg), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "encoder.ckpt"));
  EXPECT_EQ(count_lines(slurp(dir / "metrics" / "pretrain.csv")), 2u);

  ASSERT_EQ(run(cmd_fewshot, cfg), kExitOk);
  const auto fewshot = nlohmann::json::parse(slurp(dir / "metrics" / "fewshot.json"));
  EXPECT_EQ(fewshot["labeled_samples"].get<int>(), 70);
  for (const auto& n : fewshot["per_class_samples"]) EXPECT_EQ(n.get<int>(), 10);

  ASSERT_EQ(run(cmd_eval, cfg), kExitOk);
  const auto eval = nlohmann::json::parse(slurp(dir / "metrics" / "eval.json"));
  const double acc = eval[0]["accuracy"].get<double>();
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);
  EXPECT_EQ(eval[0]["per_class_accuracy"].size(), 7u);
  const auto per_class = slurp(dir / "metrics" / "eval_per_class.csv");
  EXPECT_EQ(count_lines(per_class), 1u + 7u);
  EXPECT_NE(per_class.find("6,70,"), std::string::npos);

  // Rerunning with the same config reproduces every metrics file byte for byte.
  const auto first = slurp(dir / "metrics" / "eval.csv");
  ASSERT_EQ(run(cmd_pretrain, cfg), kExitOk);
  ASSERT_EQ(run(cmd_fewshot, cfg), kExitOk);
  ASSERT_EQ(run(cmd_eval, cfg), kExitOk);
  EXPECT_EQ(slurp(dir / "metrics" / "eval.csv"), first);
  fs::remove_all(dir);
}

TEST(Pipeline, MetricsFilesShareFixedHeaders) {
  // Each CSV starts with a fixed header, so bodies from separate runs can be concatenated.
  const auto dir = scratch("headers");
  RunConfig cfg = small_config(dir, 2, 3, 2);
  cfg.split = {1, 2, 0};
  cfg.ablation.modes = {model::Mode::kAmpOnly, model::Mode::kFullSup};
  cfg.ablation.shots = {1};
  cfg.ablation.seeds = {0};
  cfg.ablation.latent_sizes = {256};
  ASSERT_EQ(run(cmd_synth, cfg), kExitOk);
  ASSERT_EQ(run(cmd_fullsup, cfg), kExitOk);
  ASSERT_EQ(run(cmd_ablate, cfg), kExitOk);
  const auto header = [&](const std::string& name) {
    const auto text = slurp(dir / "metrics" / name);
    EXPECT_FALSE(text.empty()) << name;
    EXPECT_EQ(text.back(), '\n') << name;
    return text.substr(0, text.find('\n'));
  };
  EXPECT_EQ(header("fullsup.csv"), header("ablation_runs.csv"));
  EXPECT_EQ(header("fullsup.csv").substr(0, 16), "mode,shots,laten");
  EXPECT_EQ(header("ablation_table.csv"), "mode,latent,acc_1shot,avg,delta");
  EXPECT_EQ(count_lines(slurp(dir / "metrics" / "ablation_runs.csv")), 3u);
  fs::remove_all(dir);
}

TEST(ExitCodes, MissingInputsAndConfig) {
  const auto dir = scratch("exit");
  RunConfig cfg = small_config(dir, 2, 3, 0);
  EXPECT_EQ(run(cmd_pretrain, cfg), kExitMissingInput);
  EXPECT_EQ(run(cmd_fewshot, cfg), kExitMissingInput);
  EXPECT_EQ(run(cmd_eval, cfg), kExitMissingInput);
  cfg.paths.data_in = dir / "nope.csv";
  EXPECT_EQ(run(cmd_sanitize, cfg), kExitMissingInput);
  std::ostringstream o;
  EXPECT_EQ(guarded([] { throw ConfigError("x"); }, Console{o, o}), kExitConfigError);
  EXPECT_EQ(guarded([] { throw NumericalError("x"); }, Console{o, o}), kExitNumericalFailure);
  EXPECT_EQ(guarded([] { throw std::runtime_error("x"); }, Console{o, o}), kExitFailure);
  fs::remove_all(dir);
}

TEST(ExitCodes, Binary) {
  if (!std::getenv("AUTOSEN_BIN")) GTEST_SKIP() << "AUTOSEN_BIN not set";
  const auto dir = scratch("binary");
  std::ofstream(dir / "bad.json") << R"({"train": {"epochz": 1}})";
  std::ofstream(dir / "ok.json") << R"({"synth": {"per_class": 2, "unlabeled": 0}})";
  EXPECT_EQ(run_binary("--config " + (dir / "bad.json").string() + " synth"), kExitConfigError);
  EXPECT_EQ(run_binary("--config /nonexistent.json synth"), kExitConfigError);
  EXPECT_EQ(run_binary("--out " + (dir / "o").string() + " fewshot"), kExitMissingInput);
  EXPECT_EQ(run_binary("--config " + (dir / "ok.json").string() + " --out " + (dir / "o").string() +
                       " synth"),
            kExitOk);
  EXPECT_TRUE(fs::exists(dir / "o" / "dataset.cache"));
  EXPECT_EQ(run_binary("no-such-command"), kExitConfigError);
  fs::remove_all(dir);
}

TEST(GradCheckCommand, CoversEveryLayerTypeAndPasses) {
  const auto cases = default_gradcheck_cases();
  std::vector<std::string> names;
  for (const auto& c : cases) names.push_back(c.name);
  for (const char* want : {"conv2d", "conv-transpose2d", "dense", "mse", "cross-entropy"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  }
  // Skip the two full-architecture cases here; the grad_check suite covers them.
  std::vector<GradCheckCase> small;
  for (const auto& c : cases) {
    if (c.name.find('+') == std::string::npos) small.push_back(c);
  }
  std::ostringstream out;
  EXPECT_EQ(run_gradcheck(small, Console{out, out}), kExitOk);
  EXPECT_GE(count_lines(out.str()), 6u);
}

TEST(GradCheckCommand, CorruptedBackwardFails) {
  GradCheckCase broken{"corrupted", [] {
                         nn::GradCheckReport r;
                         r.entries.push_back({"weight", 10, 0, 0.5});
                         r.max_relative_error = 0.5;
                         r.checked = 10;
                         return r;
                       }};
  GradCheckCase throwing{"non-finite", []() -> nn::GradCheckReport {
                           throw NumericalError("nan in backward");
                         }};
  std::ostringstream out;
  EXPECT_EQ(run_gradcheck({broken}, Console{out, out}), kExitNumericalFailure);
  EXPECT_NE(out.str().find("corrupted"), std::string::npos);
  EXPECT_EQ(run_gradcheck({throwing}, Console{out, out}), kExitNumericalFailure);
}
