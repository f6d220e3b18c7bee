#include "run_config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace autosen::cli {

namespace {

using json = nlohmann::json;

// Walks a JSON object, consuming known keys and rejecting the rest.
class Reader {
 public:
  Reader(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~Reader() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void get_path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  void get_range(const char* key, synth::Range& out) {
    std::vector<double> pair{out.lo, out.hi};
    get(key, pair);
    if (pair.size() != 2) throw ConfigError(where_ + "." + key + ": expected [lo, hi]");
    out = {pair[0], pair[1]};
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& node_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string pool_name(model::FullSupPool p) {
  return p == model::FullSupPool::kFewShot ? "fewshot" : "all-training";
}

}  // namespace

std::filesystem::path PathSettings::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : out / p;
}

void RunConfig::apply_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  split.seed = s;
}

void RunConfig::validate() const {
  try {
    train.validate();
    channel.validate();
    csv.layout.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (synth.classes < 2) throw ConfigError("synth.classes must be >= 2");
  if (synth.duration_packets == 0) throw ConfigError("synth.duration_packets must be >= 1");
  if (csv.downsample_factor == 0) throw ConfigError("csv.downsample_factor must be >= 1");
  if (csv.window.length == 0 || csv.window.stride == 0) {
    throw ConfigError("csv window length and stride must be >= 1");
  }
  if (!(csv.source_rate_hz > 0.0)) throw ConfigError("csv.source_rate_hz must be positive");
  if (ablation.modes.empty() || ablation.shots.empty() || ablation.seeds.empty() ||
      ablation.latent_sizes.empty()) {
    throw ConfigError("ablation lists must be non-empty");
  }
  for (auto l : ablation.latent_sizes) {
    if (l == 0) throw ConfigError("ablation.latent_sizes entries must be >= 1");
  }
  if (num_classes == 1) throw ConfigError("num_classes must be 0 (infer) or >= 2");
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Reader root(doc, "config");
  std::uint64_t seed = cfg.seed;
  root.get("seed", seed);
  cfg.apply_seed(seed);
  root.get("num_classes", cfg.num_classes);

  if (const json* node = root.child("train")) {
    Reader r(*node, "train");
    r.get("epochs", cfg.train.epochs);
    r.get("batch_size", cfg.train.batch_size);
    r.get("lr", cfg.train.lr);
    r.get("latent_size", cfg.train.latent_size);
    r.get("calibration_epochs", cfg.train.calibration_epochs);
    std::string mode(model::mode_name(cfg.train.mode));
    r.get("mode", mode);
    try {
      cfg.train.mode = model::parse_mode(mode);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("train.mode: ") + e.what());
    }
    r.finish();
  }
  if (const json* node = root.child("channel")) {
    Reader r(*node, "channel");
    r.get("carrier_hz", cfg.channel.carrier_hz);
    r.get("subcarrier_spacing_hz", cfg.channel.subcarrier_spacing_hz);
    r.get("subcarrier_indices", cfg.channel.subcarrier_indices);
    r.get("antennas", cfg.channel.antennas);
    r.get("packet_rate_hz", cfg.channel.packet_rate_hz);
    r.get("antenna_phase_shifts", cfg.channel.antenna_phase_shifts);
    r.get("noise_std", cfg.channel.noise_std);
    r.get("phase_noise_std", cfg.channel.phase_noise_std);
    r.finish();
  }
  if (const json* node = root.child("synth")) {
    Reader r(*node, "synth");
    r.get("classes", cfg.synth.classes);
    r.get("per_class", cfg.synth.per_class);
    r.get("unlabeled", cfg.synth.unlabeled);
    r.get("duration_packets", cfg.synth.duration_packets);
    r.get("sanitize", cfg.synth.sanitize);
    if (const json* off = r.child("offsets")) {
      Reader o(*off, "synth.offsets");
      o.get_range("cfo_hz", cfg.synth.offsets.cfo_hz);
      o.get_range("sfo_ppm", cfg.synth.offsets.sfo_ppm);
      o.get("pdd_max_s", cfg.synth.offsets.pdd_max_s);
      o.finish();
    }
    r.finish();
  }
  if (const json* node = root.child("csv")) {
    Reader r(*node, "csv");
    auto& l = cfg.csv.layout;
    r.get("timestamp_column", l.timestamp_column);
    r.get("amplitude_first", l.amplitude_first);
    r.get("phase_first", l.phase_first);
    r.get("width", l.width);
    std::string delimiter(1, l.delimiter);
    r.get("delimiter", delimiter);
    if (delimiter.size() != 1) throw ConfigError("csv.delimiter must be a single character");
    l.delimiter = delimiter[0];
    r.get("has_header", l.has_header);
    r.get("source_rate_hz", cfg.csv.source_rate_hz);
    r.get("downsample_factor", cfg.csv.downsample_factor);
    r.get("window_length", cfg.csv.window.length);
    r.get("window_stride", cfg.csv.window.stride);
    r.get("unlabeled_segments_per_file", cfg.csv.unlabeled_segments_per_file);
    r.finish();
  }
  if (const json* node = root.child("split")) {
    Reader r(*node, "split");
    r.get("shots", cfg.split.shots_per_class);
    r.get("eval_per_class", cfg.split.eval_per_class);
    r.finish();
  }
  if (const json* node = root.child("paths")) {
    Reader r(*node, "paths");
    r.get_path("out", cfg.paths.out);
    r.get_path("data_in", cfg.paths.data_in);
    r.get_path("manifest", cfg.paths.manifest);
    r.get_path("cache", cfg.paths.cache);
    r.get_path("checkpoints", cfg.paths.checkpoints);
    r.get_path("metrics", cfg.paths.metrics);
    r.finish();
  }
  if (const json* node = root.child("ablation")) {
    Reader r(*node, "ablation");
    std::vector<std::string> modes;
    for (auto m : cfg.ablation.modes) modes.emplace_back(model::mode_name(m));
    r.get("modes", modes);
    cfg.ablation.modes.clear();
    for (const auto& m : modes) {
      try {
        cfg.ablation.modes.push_back(model::parse_mode(m));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("ablation.modes: ") + e.what());
      }
    }
    r.get("shots", cfg.ablation.shots);
    r.get("seeds", cfg.ablation.seeds);
    r.get("latent_sizes", cfg.ablation.latent_sizes);
    std::string pool = pool_name(cfg.ablation.fullsup_pool);
    r.get("fullsup_pool", pool);
    if (pool == "fewshot") {
      cfg.ablation.fullsup_pool = model::FullSupPool::kFewShot;
    } else if (pool == "all-training") {
      cfg.ablation.fullsup_pool = model::FullSupPool::kAllTraining;
    } else {
      throw ConfigError("ablation.fullsup_pool must be 'fewshot' or 'all-training'");
    }
    r.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["num_classes"] = cfg.num_classes;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"lr", cfg.train.lr},
                {"latent_size", cfg.train.latent_size},
                {"calibration_epochs", cfg.train.calibration_epochs},
                {"mode", std::string(model::mode_name(cfg.train.mode))}};
  j["channel"] = {{"carrier_hz", cfg.channel.carrier_hz},
                  {"subcarrier_spacing_hz", cfg.channel.subcarrier_spacing_hz},
                  {"subcarrier_indices", cfg.channel.subcarrier_indices},
                  {"antennas", cfg.channel.antennas},
                  {"packet_rate_hz", cfg.channel.packet_rate_hz},
                  {"antenna_phase_shifts", cfg.channel.antenna_phase_shifts},
                  {"noise_std", cfg.channel.noise_std},
                  {"phase_noise_std", cfg.channel.phase_noise_std}};
  const auto& o = cfg.synth.offsets;
  j["synth"] = {{"classes", cfg.synth.classes},
                {"per_class", cfg.synth.per_class},
                {"unlabeled", cfg.synth.unlabeled},
                {"duration_packets", cfg.synth.duration_packets},
                {"sanitize", cfg.synth.sanitize},
                {"offsets",
                 {{"cfo_hz", {o.cfo_hz.lo, o.cfo_hz.hi}},
                  {"sfo_ppm", {o.sfo_ppm.lo, o.sfo_ppm.hi}},
                  {"pdd_max_s", o.pdd_max_s}}}};
  const auto& l = cfg.csv.layout;
  j["csv"] = {{"timestamp_column", l.timestamp_column},
              {"amplitude_first", l.amplitude_first},
              {"phase_first", l.phase_first},
              {"width", l.width},
              {"delimiter", std::string(1, l.delimiter)},
              {"has_header", l.has_header},
              {"source_rate_hz", cfg.csv.source_rate_hz},
              {"downsample_factor", cfg.csv.downsample_factor},
              {"window_length", cfg.csv.window.length},
              {"window_stride", cfg.csv.window.stride},
              {"unlabeled_segments_per_file", cfg.csv.unlabeled_segments_per_file}};
  j["split"] = {{"shots", cfg.split.shots_per_class},
                {"eval_per_class", cfg.split.eval_per_class}};
  j["paths"] = {{"out", cfg.paths.out.string()},
                {"data_in", cfg.paths.data_in.string()},
                {"manifest", cfg.paths.manifest.string()},
                {"cache", cfg.paths.cache.string()},
                {"checkpoints", cfg.paths.checkpoints.string()},
                {"metrics", cfg.paths.metrics.string()}};
  std::vector<std::string> modes;
  for (auto m : cfg.ablation.modes) modes.emplace_back(model::mode_name(m));
  j["ablation"] = {{"modes", modes},
                   {"shots", cfg.ablation.shots},
                   {"seeds", cfg.ablation.seeds},
                   {"latent_sizes", cfg.ablation.latent_sizes},
                   {"fullsup_pool", pool_name(cfg.ablation.fullsup_pool)}};
  return j.dump(2);
}

}  // namespace autosen::cli
