#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "run_config.hpp"

using namespace autosen::cli;

int main(int argc, char** argv) {
  CLI::App app{"autosen: WiFi CSI activity recognition with cross-modal pretraining"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  app.add_option("--config", config_path, "JSON run configuration (fallback: $AUTOSEN_CONFIG)");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--out", out_dir, "Override paths.out");

  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");

  struct Entry {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&, Console);
  };
  const Entry entries[] = {
      {"synth", "Generate a synthetic labelled + unlabelled sample cache", cmd_synth},
      {"sanitize", "Ingest CSV recordings or a cache and sanitize phase", cmd_sanitize},
      {"pretrain", "Autoencoder pretraining; writes encoder/decoder checkpoints", cmd_pretrain},
      {"fewshot", "Calibrate a classifier on the frozen encoder", cmd_fewshot},
      {"eval", "Evaluate encoder + classifier on the held-out split", cmd_eval},
      {"fullsup", "End-to-end supervised baseline on amplitude", cmd_fullsup},
      {"ablate", "Modality ablation table", cmd_ablate},
      {"sweep-latent", "Latent-size sweep table", cmd_sweep_latent},
  };
  for (const auto& e : entries) app.add_subcommand(e.name, e.help);
  app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  Console io{std::cout, std::cerr};
  RunConfig cfg;
  const int loaded = guarded(
      [&] {
        if (config_path.empty()) {
          if (const char* env = std::getenv("AUTOSEN_CONFIG"); env && *env) config_path = env;
        }
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed) cfg.apply_seed(*seed);
        if (!out_dir.empty()) cfg.paths.out = out_dir;
      },
      io);
  if (loaded != kExitOk) return loaded;
  if (print_config) {
    std::cout << dump_config(cfg) << '\n';
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << "a subcommand is required\n" << app.help();
    return kExitConfigError;
  }

  const auto* sub = app.get_subcommands().front();
  if (sub->get_name() == "gradcheck") {
    return run_gradcheck(default_gradcheck_cases(), io);
  }
  for (const auto& e : entries) {
    if (sub->get_name() == e.name) return guarded([&] { e.run(cfg, io); }, io);
  }
  return kExitFailure;
}
