#pragma once

// Subcommand implementations shared by the autosen executable and the tests.

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosen/nn/grad_check.hpp"
#include "run_config.hpp"

namespace autosen::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigError = 2,
  kExitMissingInput = 3,
  kExitNumericalFailure = 4,
};

/// A required input file (cache, checkpoint, recording) is absent.
class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streams for the command summary (`out`) and progress messages (`log`).
struct Console {
  std::ostream& out;
  std::ostream& log;
};

void cmd_synth(const RunConfig& cfg, Console io);
void cmd_sanitize(const RunConfig& cfg, Console io);
void cmd_pretrain(const RunConfig& cfg, Console io);
void cmd_fewshot(const RunConfig& cfg, Console io);
void cmd_eval(const RunConfig& cfg, Console io);
void cmd_fullsup(const RunConfig& cfg, Console io);
void cmd_ablate(const RunConfig& cfg, Console io);
void cmd_sweep_latent(const RunConfig& cfg, Console io);

struct GradCheckCase {
  std::string name;
  std::function<nn::GradCheckReport()> run;
};

inline constexpr double kGradCheckThreshold = 1e-4;

/// conv2d, conv-transpose2d, dense, relu, mse and cross-entropy paths, plus
/// the full encoder+decoder and encoder+classifier stacks.
std::vector<GradCheckCase> default_gradcheck_cases();

/// Prints one row per case; returns kExitNumericalFailure if any case breaches
/// the threshold or produces a non-finite gradient.
int run_gradcheck(const std::vector<GradCheckCase>& cases, Console io,
                  double threshold = kGradCheckThreshold);

/// Runs `command`, mapping exceptions to exit codes and messages on io.log.
int guarded(const std::function<void()>& command, Console io);

}  // namespace autosen::cli
