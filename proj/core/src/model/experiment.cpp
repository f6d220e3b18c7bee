#include "autosen/model/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "autosen/data/dataset.hpp"
#include "autosen/error.hpp"

namespace autosen::model {

namespace {

std::vector<csi::CsiSample> pick(std::span<const csi::CsiSample> samples,
                                 std::span<const std::size_t> indices) {
  std::vector<csi::CsiSample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples[i]);
  return out;
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

nlohmann::ordered_json exact_array(std::span<const double> values) {
  auto arr = nlohmann::ordered_json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string percent(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * fraction;
  return os.str();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

AblationTable run_ablation(std::span<const csi::CsiSample> unlabeled,
                           std::span<const csi::CsiSample> labeled, const AblationGrid& grid,
                           const TrainConfig& base, std::size_t num_classes,
                           const ProgressCallback& progress) {
  if (grid.modes.empty() || grid.shots.empty() || grid.seeds.empty() ||
      grid.latent_sizes.empty()) {
    throw InvalidInput("run_ablation: every grid axis needs at least one value");
  }
  const auto needs_pretraining = std::any_of(grid.modes.begin(), grid.modes.end(),
                                             [](Mode m) { return m != Mode::kFullSup; });
  if (needs_pretraining && unlabeled.empty()) {
    throw InvalidInput("run_ablation: no unlabelled samples for pretraining");
  }
  const auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  AblationTable table;
  table.shots = grid.shots;
  // Splits depend only on (seed, shots); compute once and share across modes.
  std::map<std::pair<std::uint64_t, std::size_t>, data::Split> splits;
  for (auto seed : grid.seeds) {
    for (auto shots : grid.shots) {
      splits[{seed, shots}] = data::make_split(labeled, {shots, grid.eval_per_class, seed});
    }
  }

  for (Mode mode : grid.modes) {
    for (auto latent : grid.latent_sizes) {
      for (auto seed : grid.seeds) {
        TrainConfig cfg = base;
        cfg.mode = mode;
        cfg.latent_size = latent;
        cfg.seed = seed;
        const std::string tag = std::string(mode_name(mode)) + " latent=" +
                                std::to_string(latent) + " seed=" + std::to_string(seed);

        std::optional<PretrainResult> pretrained;
        if (mode != Mode::kFullSup) {
          say("pretraining " + tag);
          pretrained = pretrain(unlabeled, cfg);
        }
        for (auto shots : grid.shots) {
          const auto& split = splits.at({seed, shots});
          const auto eval_set = pick(labeled, split.eval);
          RunMetrics row;
          row.mode = std::string(mode_name(mode));
          row.shots = shots;
          row.latent = latent;
          row.seed = seed;
          Evaluation ev;
          if (pretrained) {
            const auto fewshot = pick(labeled, split.fewshot);
            auto cal = few_shot_calibrate(pretrained->encoder, fewshot, cfg, num_classes);
            ev = evaluate(pretrained->encoder, cal.classifier, eval_set, mode, num_classes);
            row.pretrain_losses = pretrained->epoch_losses;
            row.classifier_losses = std::move(cal.epoch_losses);
            row.encoder_params = pretrained->encoder.parameter_count();
            row.classifier_params = cal.classifier.parameter_count();
          } else {
            std::vector<std::size_t> pool = split.fewshot;
            if (grid.fullsup_pool == FullSupPool::kAllTraining) {
              std::vector<std::size_t> held(split.eval.begin(), split.eval.end());
              std::sort(held.begin(), held.end());
              pool.clear();
              for (std::size_t i = 0; i < labeled.size(); ++i) {
                if (labeled[i].label && !std::binary_search(held.begin(), held.end(), i)) {
                  pool.push_back(i);
                }
              }
            }
            const auto train_set = pick(labeled, pool);
            auto sup = train_full_supervision(train_set, cfg, num_classes);
            ev = evaluate(sup.encoder, sup.classifier, eval_set, Mode::kFullSup, num_classes);
            row.classifier_losses = std::move(sup.epoch_losses);
            row.encoder_params = sup.encoder.parameter_count();
            row.classifier_params = sup.classifier.parameter_count();
          }
          row.accuracy = ev.accuracy;
          row.per_class_accuracy = std::move(ev.per_class_accuracy);
          say("  " + tag + " shots=" + std::to_string(shots) + " accuracy=" +
              percent(row.accuracy) + "%");
          table.runs.push_back(std::move(row));
        }
      }
    }
  }
  const bool has_ref = std::find(grid.latent_sizes.begin(), grid.latent_sizes.end(),
                                 grid.reference_latent) != grid.latent_sizes.end();
  table.summaries =
      summarize(table.runs, table.shots, has_ref ? grid.reference_latent : grid.latent_sizes.front());
  return table;
}

std::vector<AblationSummary> summarize(const std::vector<RunMetrics>& runs,
                                       const std::vector<std::size_t>& shots,
                                       std::size_t reference_latent) {
  // Preserve first-appearance order of (mode, latent) rows.
  std::vector<std::pair<std::string, std::size_t>> keys;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.mode, r.latent);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<AblationSummary> out;
  for (const auto& [mode, latent] : keys) {
    AblationSummary s;
    s.mode = parse_mode(mode);
    s.latent = latent;
    for (auto k : shots) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : runs) {
        if (r.mode == mode && r.latent == latent && r.shots == k) {
          sum += r.accuracy;
          ++n;
        }
      }
      s.accuracy_per_shot.push_back(n ? sum / static_cast<double>(n) : 0.0);
    }
    double total = 0.0;
    for (double a : s.accuracy_per_shot) total += a;
    s.average = s.accuracy_per_shot.empty() ? 0.0
                                            : total / static_cast<double>(s.accuracy_per_shot.size());
    out.push_back(std::move(s));
  }
  const auto ref = std::find_if(out.begin(), out.end(), [&](const AblationSummary& s) {
    return s.mode == Mode::kCrossModal && s.latent == reference_latent;
  });
  if (ref != out.end()) {
    const double base = ref->average;
    for (auto& s : out) s.delta = s.average - base;
  }
  return out;
}

std::string format_table(const AblationTable& table) {
  std::ostringstream os;
  os << std::left << std::setw(13) << "Mode" << std::setw(8) << "Latent";
  for (auto k : table.shots) os << std::setw(11) << (std::to_string(k) + "-shots");
  os << std::setw(9) << "Avg" << "Delta\n";
  for (const auto& s : table.summaries) {
    os << std::setw(13) << mode_name(s.mode) << std::setw(8) << s.latent;
    for (double a : s.accuracy_per_shot) os << std::setw(11) << percent(a);
    os << std::setw(9) << percent(s.average);
    if (s.delta) {
      os << (*s.delta >= 0.0 ? "+" : "") << percent(*s.delta);
    } else {
      os << "n/a";
    }
    os << '\n';
  }
  return os.str();
}

void write_metrics_csv(std::span<const RunMetrics> runs, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "mode,shots,latent,seed,accuracy,encoder_params,classifier_params,epochs_pretrain,"
         "final_pretrain_loss,pretrain_losses,classifier_losses,per_class_accuracy\n";
  for (const auto& r : runs) {
    out << r.mode << ',' << r.shots << ',' << r.latent << ',' << r.seed << ','
        << format_double(r.accuracy) << ',' << r.encoder_params << ',' << r.classifier_params
        << ',' << r.pretrain_losses.size() << ','
        << (r.pretrain_losses.empty() ? std::string() : format_double(r.pretrain_losses.back()))
        << ',' << join(r.pretrain_losses) << ',' << join(r.classifier_losses) << ','
        << join(r.per_class_accuracy) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_metrics_json(std::span<const RunMetrics> runs, const std::filesystem::path& path) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json j;
    j["mode"] = r.mode;
    j["shots"] = r.shots;
    j["latent"] = r.latent;
    j["seed"] = r.seed;
    j["accuracy"] = r.accuracy;
    j["per_class_accuracy"] = exact_array(r.per_class_accuracy);
    j["encoder_params"] = r.encoder_params;
    j["classifier_params"] = r.classifier_params;
    j["pretrain_losses"] = exact_array(r.pretrain_losses);
    j["classifier_losses"] = exact_array(r.classifier_losses);
    arr.push_back(std::move(j));
  }
  auto out = open_out(path);
  out << arr.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_summary_csv(const AblationTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "mode,latent";
  for (auto k : table.shots) out << ",acc_" << k << "shot";
  out << ",avg,delta\n";
  for (const auto& s : table.summaries) {
    out << mode_name(s.mode) << ',' << s.latent;
    for (double a : s.accuracy_per_shot) out << ',' << format_double(a);
    out << ',' << format_double(s.average) << ','
        << (s.delta ? format_double(*s.delta) : std::string()) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_summary_json(const AblationTable& table, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["shots"] = table.shots;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& s : table.summaries) {
    nlohmann::ordered_json j;
    j["mode"] = std::string(mode_name(s.mode));
    j["latent"] = s.latent;
    j["accuracy_per_shot"] = exact_array(s.accuracy_per_shot);
    j["avg"] = s.average;
    j["delta"] = s.delta ? nlohmann::ordered_json(*s.delta) : nlohmann::ordered_json(nullptr);
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace autosen::model
