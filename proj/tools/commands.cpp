#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>

#include "autosen/csi/csi.hpp"
#include "autosen/error.hpp"
#include "autosen/model/autosen.hpp"
#include "autosen/model/experiment.hpp"
#include "autosen/nn/checkpoint.hpp"
#include "autosen/nn/layers.hpp"
#include "autosen/nn/loss.hpp"
#include "autosen/random.hpp"

namespace autosen::cli {

namespace fs = std::filesystem;
using csi::CsiSample;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kUnlabeledStream = 0x756e6c61ULL;
constexpr std::uint64_t kSegmentStream = 0x73656773ULL;

fs::path cache_path(const RunConfig& cfg) { return cfg.paths.resolve(cfg.paths.cache); }
fs::path checkpoint_path(const RunConfig& cfg, const char* name) {
  return cfg.paths.resolve(cfg.paths.checkpoints) / name;
}
fs::path metrics_path(const RunConfig& cfg, const std::string& name) {
  return cfg.paths.resolve(cfg.paths.metrics) / name;
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

void require(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw MissingInputError(std::string(what) + " not found: " + path.string());
  }
}

std::vector<CsiSample> load_cache(const RunConfig& cfg) {
  const auto path = cache_path(cfg);
  require(path, "sample cache");
  return data::cache_read(path);
}

nn::LayerStack load_stack(const fs::path& path, const char* what) {
  require(path, what);
  return nn::load_checkpoint(path);
}

void save_stack(const nn::LayerStack& stack, const fs::path& path) {
  ensure_parent(path);
  nn::save_checkpoint(stack, path);
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<CsiSample> labeled_of(const std::vector<CsiSample>& samples) {
  std::vector<CsiSample> out;
  for (const auto& s : samples) {
    if (s.label) out.push_back(s);
  }
  return out;
}

std::vector<CsiSample> pick(const std::vector<CsiSample>& samples,
                            const std::vector<std::size_t>& indices) {
  std::vector<CsiSample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples.at(i));
  return out;
}

std::size_t class_count(const RunConfig& cfg, const std::vector<CsiSample>& labeled) {
  if (cfg.num_classes != 0) return cfg.num_classes;
  int top = -1;
  for (const auto& s : labeled) top = std::max(top, *s.label);
  if (top < 1) throw InvalidInput("need labelled samples from at least 2 classes");
  return static_cast<std::size_t>(top) + 1;
}

data::SplitSpec split_spec(const RunConfig& cfg) { return cfg.split; }

std::size_t latent_of(const nn::LayerStack& encoder, const CsiSample& probe, model::Mode mode) {
  return encoder.output_shape(model::model_input(probe, mode).shape()).at(0);
}

std::size_t calibration_epochs(const RunConfig& cfg) {
  return cfg.train.calibration_epochs ? cfg.train.calibration_epochs : cfg.train.epochs;
}

model::EpochCallback epoch_logger(std::ostream& log, std::string tag, std::size_t epochs) {
  return [&log, tag = std::move(tag), epochs](std::size_t epoch, double loss) {
    log << tag << " epoch " << epoch + 1 << '/' << epochs << " loss " << loss << '\n';
  };
}

void write_loss_csv(const fs::path& path, const std::vector<double>& losses) {
  std::string text = "epoch,loss\n";
  for (std::size_t e = 0; e < losses.size(); ++e) {
    text += std::to_string(e + 1) + ',' + model::format_double(losses[e]) + '\n';
  }
  write_text(path, text);
}

void write_json(const fs::path& path, const ojson& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_per_class_csv(const fs::path& path, const model::Evaluation& ev) {
  std::string text = "class,count,accuracy\n";
  for (std::size_t c = 0; c < ev.per_class_accuracy.size(); ++c) {
    text += std::to_string(c) + ',' + std::to_string(ev.per_class_count[c]) + ',' +
            model::format_double(ev.per_class_accuracy[c]) + '\n';
  }
  write_text(path, text);
}

void write_run(const RunConfig& cfg, const std::string& stem, const model::RunMetrics& run,
               const model::Evaluation& ev) {
  const std::vector<model::RunMetrics> runs{run};
  const auto csv = metrics_path(cfg, stem + ".csv");
  ensure_parent(csv);
  model::write_metrics_csv(runs, csv);
  model::write_metrics_json(runs, metrics_path(cfg, stem + ".json"));
  write_per_class_csv(metrics_path(cfg, stem + "_per_class.csv"), ev);
}

void print_evaluation(std::ostream& out, const model::Evaluation& ev) {
  out << "accuracy " << std::fixed << std::setprecision(2) << 100.0 * ev.accuracy << "% on "
      << ev.predictions.size() << " samples\n";
  for (std::size_t c = 0; c < ev.per_class_accuracy.size(); ++c) {
    out << "  class " << c << ": " << 100.0 * ev.per_class_accuracy[c] << "% of "
        << ev.per_class_count[c] << '\n';
  }
  out << std::defaultfloat;
}

std::vector<CsiSample> sanitize_all(const RunConfig& cfg, const std::vector<CsiSample>& samples) {
  const auto& ch = cfg.channel;
  std::vector<CsiSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.channels() != ch.channels()) {
      throw ConfigError("samples have " + std::to_string(s.channels()) +
                        " channels but channel.antennas x subcarrier_indices gives " +
                        std::to_string(ch.channels()));
    }
    out.push_back(csi::sanitize_sample(s, ch.antennas, ch.subcarriers(), ch.subcarrier_indices));
  }
  return out;
}

void print_dataset_summary(std::ostream& out, const std::vector<CsiSample>& samples) {
  std::map<int, std::size_t> per_class;
  std::size_t unlabeled = 0;
  std::size_t sanitized = 0;
  for (const auto& s : samples) {
    if (s.label) {
      ++per_class[*s.label];
    } else {
      ++unlabeled;
    }
    if (s.phase_sanitized()) ++sanitized;
  }
  out << samples.size() << " samples";
  if (!samples.empty()) {
    out << " of shape " << samples.front().timestamps() << 'x' << samples.front().channels();
  }
  out << ", " << sanitized << " sanitized\n";
  for (const auto& [label, count] : per_class) out << "  class " << label << ": " << count << '\n';
  out << "  unlabeled: " << unlabeled << '\n';
}

model::AblationGrid grid_for(const RunConfig& cfg) {
  model::AblationGrid grid;
  grid.modes = cfg.ablation.modes;
  grid.shots = cfg.ablation.shots;
  grid.seeds = cfg.ablation.seeds;
  grid.latent_sizes = {cfg.train.latent_size};
  grid.eval_per_class = cfg.split.eval_per_class;
  grid.reference_latent = cfg.train.latent_size;
  grid.fullsup_pool = cfg.ablation.fullsup_pool;
  return grid;
}

void run_grid(const RunConfig& cfg, const model::AblationGrid& grid, const std::string& stem,
              Console io) {
  const auto samples = load_cache(cfg);
  auto labeled = labeled_of(samples);
  std::vector<CsiSample> unlabeled;
  for (const auto& s : samples) {
    if (!s.label) unlabeled.push_back(s);
  }
  if (unlabeled.empty()) unlabeled = samples;
  const auto table = model::run_ablation(unlabeled, labeled, grid, cfg.train,
                                         class_count(cfg, labeled),
                                         [&](const std::string& m) { io.log << m << '\n'; });
  const auto runs_csv = metrics_path(cfg, stem + "_runs.csv");
  ensure_parent(runs_csv);
  model::write_metrics_csv(table.runs, runs_csv);
  model::write_metrics_json(table.runs, metrics_path(cfg, stem + "_runs.json"));
  model::write_summary_csv(table, metrics_path(cfg, stem + "_table.csv"));
  model::write_summary_json(table, metrics_path(cfg, stem + "_table.json"));
  const std::string text = model::format_table(table);
  write_text(metrics_path(cfg, stem + "_table.txt"), text);
  io.out << text;
}

}  // namespace

void cmd_synth(const RunConfig& cfg, Console io) {
  const auto& s = cfg.synth;
  const auto classes = synth::default_activity_classes(s.classes, s.duration_packets);
  io.log << "synthesizing " << s.classes * s.per_class << " labelled and " << s.unlabeled
         << " unlabelled samples\n";
  auto samples = synth::generate_activity_dataset(classes, s.per_class, cfg.channel, s.offsets,
                                                  cfg.seed);
  if (s.unlabeled > 0) {
    const std::size_t per_class = (s.unlabeled + s.classes - 1) / s.classes;
    const auto pool = synth::generate_activity_dataset(classes, per_class, cfg.channel, s.offsets,
                                                       derive_seed(cfg.seed, kUnlabeledStream));
    // Interleave classes so truncation keeps the mix balanced.
    for (std::size_t i = 0; i < s.unlabeled; ++i) {
      CsiSample u = pool[(i % s.classes) * per_class + i / s.classes];
      u.label.reset();
      samples.push_back(std::move(u));
    }
  }
  if (s.sanitize) samples = sanitize_all(cfg, samples);
  const auto path = cache_path(cfg);
  ensure_parent(path);
  data::cache_write(samples, path);
  io.out << "wrote " << path.string() << '\n';
  print_dataset_summary(io.out, samples);
}

void cmd_sanitize(const RunConfig& cfg, Console io) {
  std::vector<CsiSample> samples;
  const data::CorpusSpec corpus{cfg.csv.layout, cfg.csv.source_rate_hz,
                                cfg.csv.downsample_factor, cfg.csv.window};
  if (!cfg.paths.manifest.empty()) {
    require(cfg.paths.manifest, "manifest");
    samples = data::load_labeled_corpus(cfg.paths.manifest, corpus);
    if (cfg.csv.unlabeled_segments_per_file > 0) {
      std::vector<fs::path> files;
      for (const auto& e : data::read_manifest(cfg.paths.manifest)) {
        if (std::find(files.begin(), files.end(), e.file) == files.end()) files.push_back(e.file);
      }
      for (std::size_t f = 0; f < files.size(); ++f) {
        require(files[f], "recording");
        const auto stream = data::downsample(
            data::load_csv(files[f], cfg.csv.layout, cfg.csv.source_rate_hz),
            cfg.csv.downsample_factor);
        auto segs = data::random_segments(stream, cfg.csv.window.length,
                                          cfg.csv.unlabeled_segments_per_file,
                                          derive_seed(derive_seed(cfg.seed, kSegmentStream), f));
        for (auto& seg : segs) samples.push_back(std::move(seg));
      }
    }
  } else if (!cfg.paths.data_in.empty()) {
    require(cfg.paths.data_in, "input");
    if (cfg.paths.data_in.extension() == ".csv") {
      const auto stream = data::downsample(
          data::load_csv(cfg.paths.data_in, cfg.csv.layout, cfg.csv.source_rate_hz),
          cfg.csv.downsample_factor);
      samples = data::window_samples(stream, cfg.csv.window);
    } else {
      samples = data::cache_read(cfg.paths.data_in);
    }
  } else {
    samples = load_cache(cfg);
  }
  io.log << "sanitizing " << samples.size() << " samples\n";
  samples = sanitize_all(cfg, samples);
  const auto path = cache_path(cfg);
  ensure_parent(path);
  data::cache_write(samples, path);
  io.out << "wrote " << path.string() << '\n';
  print_dataset_summary(io.out, samples);
}

void cmd_pretrain(const RunConfig& cfg, Console io) {
  if (cfg.train.mode == model::Mode::kFullSup) {
    throw ConfigError("fullsup has no pretraining stage; use the fullsup command");
  }
  const auto samples = load_cache(cfg);
  std::vector<CsiSample> unlabeled;
  for (const auto& s : samples) {
    if (!s.label) unlabeled.push_back(s);
  }
  if (unlabeled.empty()) {
    io.log << "no unlabelled samples in cache; pretraining on all samples without labels\n";
    unlabeled = samples;
  }
  io.log << "pretraining " << model::mode_name(cfg.train.mode) << " on " << unlabeled.size()
         << " samples\n";
  const auto result = model::pretrain(unlabeled, cfg.train,
                                      epoch_logger(io.log, "pretrain", cfg.train.epochs));
  save_stack(result.encoder, checkpoint_path(cfg, "encoder.ckpt"));
  save_stack(result.decoder, checkpoint_path(cfg, "decoder.ckpt"));

  write_loss_csv(metrics_path(cfg, "pretrain.csv"), result.epoch_losses);
  ojson doc;
  doc["mode"] = std::string(model::mode_name(cfg.train.mode));
  doc["latent"] = cfg.train.latent_size;
  doc["seed"] = cfg.train.seed;
  doc["epochs"] = cfg.train.epochs;
  doc["batch_size"] = cfg.train.batch_size;
  doc["lr"] = cfg.train.lr;
  doc["samples"] = unlabeled.size();
  doc["encoder_params"] = result.encoder.parameter_count();
  doc["decoder_params"] = result.decoder.parameter_count();
  doc["epoch_losses"] = result.epoch_losses;
  write_json(metrics_path(cfg, "pretrain.json"), doc);
  io.out << "pretrain loss " << result.epoch_losses.front() << " -> "
         << result.epoch_losses.back() << " over " << result.epoch_losses.size() << " epochs\n";
}

void cmd_fewshot(const RunConfig& cfg, Console io) {
  const auto encoder = load_stack(checkpoint_path(cfg, "encoder.ckpt"), "encoder checkpoint");
  const auto labeled = labeled_of(load_cache(cfg));
  const std::size_t classes = class_count(cfg, labeled);
  const auto split = data::make_split(labeled, split_spec(cfg));
  const auto shots = pick(labeled, split.fewshot);
  io.log << "calibrating on " << shots.size() << " labelled samples\n";
  const auto result = model::few_shot_calibrate(encoder, shots, cfg.train, classes,
                                                epoch_logger(io.log, "fewshot", calibration_epochs(cfg)));
  save_stack(result.classifier, checkpoint_path(cfg, "classifier.ckpt"));

  std::vector<std::size_t> per_class(classes, 0);
  for (const auto& s : shots) ++per_class[static_cast<std::size_t>(*s.label)];
  write_loss_csv(metrics_path(cfg, "fewshot.csv"), result.epoch_losses);
  ojson doc;
  doc["mode"] = std::string(model::mode_name(cfg.train.mode));
  doc["shots"] = cfg.split.shots_per_class;
  doc["latent"] = latent_of(encoder, shots.front(), cfg.train.mode);
  doc["seed"] = cfg.train.seed;
  doc["labeled_samples"] = shots.size();
  doc["per_class_samples"] = per_class;
  doc["classifier_params"] = result.classifier.parameter_count();
  doc["epoch_losses"] = result.epoch_losses;
  write_json(metrics_path(cfg, "fewshot.json"), doc);
  io.out << "calibrated classifier on " << shots.size() << " labelled samples, loss "
         << result.epoch_losses.back() << '\n';
}

void cmd_eval(const RunConfig& cfg, Console io) {
  const auto encoder = load_stack(checkpoint_path(cfg, "encoder.ckpt"), "encoder checkpoint");
  const auto classifier =
      load_stack(checkpoint_path(cfg, "classifier.ckpt"), "classifier checkpoint");
  const auto labeled = labeled_of(load_cache(cfg));
  const std::size_t classes = class_count(cfg, labeled);
  const auto split = data::make_split(labeled, split_spec(cfg));
  const auto test = pick(labeled, split.eval);
  const auto ev = model::evaluate(encoder, classifier, test, cfg.train.mode, classes);

  model::RunMetrics run;
  run.mode = std::string(model::mode_name(cfg.train.mode));
  run.shots = cfg.split.shots_per_class;
  run.latent = latent_of(encoder, test.front(), cfg.train.mode);
  run.seed = cfg.train.seed;
  run.accuracy = ev.accuracy;
  run.per_class_accuracy = ev.per_class_accuracy;
  run.encoder_params = encoder.parameter_count();
  run.classifier_params = classifier.parameter_count();
  write_run(cfg, "eval", run, ev);
  print_evaluation(io.out, ev);
}

void cmd_fullsup(const RunConfig& cfg, Console io) {
  const auto labeled = labeled_of(load_cache(cfg));
  const std::size_t classes = class_count(cfg, labeled);
  const auto split = data::make_split(labeled, split_spec(cfg));
  std::vector<CsiSample> pool;
  if (cfg.ablation.fullsup_pool == model::FullSupPool::kFewShot) {
    pool = pick(labeled, split.fewshot);
  } else {
    std::vector<bool> held(labeled.size(), false);
    for (auto i : split.eval) held[i] = true;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (!held[i]) pool.push_back(labeled[i]);
    }
  }
  io.log << "full supervision on " << pool.size() << " labelled samples\n";
  const auto result = model::train_full_supervision(
      pool, cfg.train, classes, epoch_logger(io.log, "fullsup", cfg.train.epochs));
  save_stack(result.encoder, checkpoint_path(cfg, "fullsup_encoder.ckpt"));
  save_stack(result.classifier, checkpoint_path(cfg, "fullsup_classifier.ckpt"));

  const auto test = pick(labeled, split.eval);
  const auto ev =
      model::evaluate(result.encoder, result.classifier, test, model::Mode::kFullSup, classes);
  model::RunMetrics run;
  run.mode = std::string(model::mode_name(model::Mode::kFullSup));
  run.shots = cfg.split.shots_per_class;
  run.latent = cfg.train.latent_size;
  run.seed = cfg.train.seed;
  run.classifier_losses = result.epoch_losses;
  run.accuracy = ev.accuracy;
  run.per_class_accuracy = ev.per_class_accuracy;
  run.encoder_params = result.encoder.parameter_count();
  run.classifier_params = result.classifier.parameter_count();
  write_run(cfg, "fullsup", run, ev);
  print_evaluation(io.out, ev);
}

void cmd_ablate(const RunConfig& cfg, Console io) { run_grid(cfg, grid_for(cfg), "ablation", io); }

void cmd_sweep_latent(const RunConfig& cfg, Console io) {
  auto grid = grid_for(cfg);
  grid.modes = {model::Mode::kCrossModal};
  grid.latent_sizes = cfg.ablation.latent_sizes;
  run_grid(cfg, grid, "sweep", io);
}

namespace {

Tensor random_tensor(nn::Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.normal();
  return t;
}

nn::LossFunction mse_against(Tensor target) {
  return [target = std::move(target)](const Tensor& out) { return nn::mse_loss(out, target); };
}

nn::LossFunction ce_against(std::vector<int> labels) {
  return [labels = std::move(labels)](const Tensor& logits) {
    return nn::cross_entropy_loss(logits, labels);
  };
}

GradCheckCase small_case(std::string name, std::uint64_t seed,
                         std::function<nn::LayerStack()> build, nn::Shape input_shape,
                         bool classify) {
  return {std::move(name), [=] {
            Rng rng(seed);
            auto stack = build();
            stack.initialize(rng);
            // Non-zero biases so the check also covers bias gradients off the origin.
            for (auto* p : stack.parameters()) {
              for (auto& v : p->value.data()) v += 0.1 * rng.normal();
            }
            const Tensor x = random_tensor(input_shape, rng);
            const auto out_shape = stack.output_shape({input_shape.begin() + 1, input_shape.end()});
            nn::LossFunction loss;
            if (classify) {
              std::vector<int> labels;
              for (std::size_t n = 0; n < input_shape[0]; ++n) {
                labels.push_back(static_cast<int>(rng.uniform_index(out_shape[0])));
              }
              loss = ce_against(std::move(labels));
            } else {
              nn::Shape full{input_shape[0]};
              full.insert(full.end(), out_shape.begin(), out_shape.end());
              loss = mse_against(random_tensor(full, rng));
            }
            nn::GradCheckOptions opt;
            opt.seed = seed;
            return nn::grad_check(stack, x, loss, opt);
          }};
}

GradCheckCase full_case(std::string name, std::uint64_t seed, bool classify) {
  return {std::move(name), [=] {
            model::ArchitectureSpec spec;
            auto nets = model::build_autosen(spec, seed);
            nn::LayerStack stack = nets.encoder;
            const auto& head = classify ? nets.classifier : nets.decoder;
            for (std::size_t i = 0; i < head.size(); ++i) stack.add(head.layer(i).clone());
            Rng rng(derive_seed(seed, 1));
            Tensor x = random_tensor({1, 1, spec.height, spec.width}, rng);
            nn::LossFunction loss;
            if (classify) {
              loss = ce_against({static_cast<int>(rng.uniform_index(spec.num_classes))});
            } else {
              loss = mse_against(random_tensor({1, 1, spec.height, spec.width}, rng));
            }
            nn::GradCheckOptions opt;
            opt.seed = seed;
            opt.max_coordinates_per_tensor = 48;
            // Input gradients here are ~1e-7, below the difference quotient's
            // roundoff on a 45k-element loss; the small cases cover them.
            opt.check_input = false;
            return nn::grad_check(stack, x, loss, opt);
          }};
}

}  // namespace

std::vector<GradCheckCase> default_gradcheck_cases() {
  using nn::Extent2d;
  std::vector<GradCheckCase> cases;
  cases.push_back(small_case(
      "conv2d", 11,
      [] {
        nn::LayerStack s;
        s.emplace<nn::Conv2d>(2, 3, Extent2d{3, 2}, Extent2d{2, 2});
        return s;
      },
      {2, 2, 7, 6}, false));
  cases.push_back(small_case(
      "conv-transpose2d", 12,
      [] {
        nn::LayerStack s;
        s.emplace<nn::ConvTranspose2d>(3, 2, Extent2d{3, 2}, Extent2d{2, 1});
        return s;
      },
      {2, 3, 3, 4}, false));
  cases.push_back(small_case(
      "dense", 13,
      [] {
        nn::LayerStack s;
        s.emplace<nn::Dense>(7, 5);
        return s;
      },
      {3, 7}, false));
  cases.push_back(small_case(
      "relu", 14,
      [] {
        nn::LayerStack s;
        s.emplace<nn::Dense>(6, 8);
        s.emplace<nn::ReLU>();
        s.emplace<nn::Dense>(8, 4);
        return s;
      },
      {3, 6}, false));
  cases.push_back(small_case(
      "mse", 15,
      [] {
        nn::LayerStack s;
        s.emplace<nn::Conv2d>(1, 4, Extent2d{2, 3}, Extent2d{2, 3});
        s.emplace<nn::ReLU>();
        s.emplace<nn::ConvTranspose2d>(4, 1, Extent2d{2, 3}, Extent2d{2, 3});
        return s;
      },
      {2, 1, 6, 9}, false));
  cases.push_back(small_case(
      "cross-entropy", 16,
      [] {
        nn::LayerStack s;
        s.emplace<nn::Conv2d>(1, 3, Extent2d{2, 2}, Extent2d{2, 2});
        s.emplace<nn::ReLU>();
        s.emplace<nn::Reshape>(nn::Shape{12});
        s.emplace<nn::Dense>(12, 5);
        return s;
      },
      {4, 1, 4, 4}, true));
  cases.push_back(full_case("encoder+decoder", 17, false));
  cases.push_back(full_case("encoder+classifier", 18, true));
  return cases;
}

int run_gradcheck(const std::vector<GradCheckCase>& cases, Console io, double threshold) {
  bool ok = true;
  io.out << std::left << std::setw(22) << "case" << std::right << std::setw(9) << "checked"
         << std::setw(9) << "kinks" << std::setw(15) << "max rel err" << "  status\n";
  for (const auto& c : cases) {
    io.out << std::left << std::setw(22) << c.name << std::right;
    try {
      const auto report = c.run();
      const bool pass = report.checked > 0 && report.max_relative_error < threshold;
      ok = ok && pass;
      io.out << std::setw(9) << report.checked << std::setw(9) << report.skipped << std::setw(15)
             << std::scientific << std::setprecision(3) << report.max_relative_error
             << std::defaultfloat << "  " << (pass ? "ok" : "FAIL") << '\n';
    } catch (const NumericalError& e) {
      ok = false;
      io.out << "  FAIL (" << e.what() << ")\n";
    }
  }
  io.out << (ok ? "all gradients within " : "gradient check failed; threshold ") << threshold
         << '\n';
  return ok ? kExitOk : kExitNumericalFailure;
}

int guarded(const std::function<void()>& command, Console io) {
  try {
    command();
    return kExitOk;
  } catch (const ConfigError& e) {
    io.log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const MissingInputError& e) {
    io.log << "missing input: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const NumericalError& e) {
    io.log << "numerical failure: " << e.what() << '\n';
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    io.log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace autosen::cli
