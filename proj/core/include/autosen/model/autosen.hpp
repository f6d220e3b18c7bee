#pragma once

// Encoder / decoder / classifier assembly and the training procedures built on
// them: cross-modal pretraining, few-shot calibration on a frozen encoder,
// full supervision, prediction and evaluation.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "autosen/csi/csi.hpp"
#include "autosen/nn/layer_stack.hpp"

namespace autosen::model {

/// Which modality feeds the encoder and which one the decoder reconstructs.
enum class Mode {
  kCrossModal,  // amplitude -> sanitized phase
  kAmpOnly,     // amplitude -> amplitude
  kPhaOnly,     // sanitized phase -> sanitized phase
  kConcat,      // [amplitude; phase] -> [amplitude; phase], stacked as 2 channels
  kFullSup,     // amplitude, encoder + classifier trained end to end with labels
};

inline constexpr std::array<Mode, 5> kAllModes{Mode::kCrossModal, Mode::kAmpOnly, Mode::kPhaOnly,
                                               Mode::kConcat, Mode::kFullSup};

std::string_view mode_name(Mode mode) noexcept;
/// Accepts the names produced by mode_name; throws InvalidInput otherwise.
Mode parse_mode(std::string_view name);

std::size_t input_channels(Mode mode) noexcept;
std::size_t target_channels(Mode mode) noexcept;
bool needs_sanitized_phase(Mode mode) noexcept;

struct ArchitectureSpec {
  std::size_t latent_size = 256;
  std::size_t input_channels = 1;
  std::size_t output_channels = 1;
  std::size_t num_classes = 7;
  std::size_t height = 500;  // timestamps
  std::size_t width = 90;    // antenna * subcarrier channels

  void validate() const;
  nn::Shape input_shape() const { return {input_channels, height, width}; }
};

/// Conv32(10,5)/s(10,5) -> Conv64(10,3)/s(10,3) -> Conv96(5,1)/s(5,1), each + ReLU,
/// flatten, Dense(latent) + ReLU.
nn::LayerStack build_encoder(const ArchitectureSpec& spec);

/// Mirror of the encoder: Dense(latent -> flat) + ReLU, unflatten, ConvT back to
/// 64, 32 and finally output_channels with a linear output. Throws InvalidInput
/// if the encoder geometry does not invert exactly to the input shape.
nn::LayerStack build_decoder(const ArchitectureSpec& spec);

/// Dense(latent -> 256) + ReLU -> Dense(256 -> 128) + ReLU -> Dense(128 -> classes).
/// Emits logits; softmax is applied by classify_proba and the loss.
nn::LayerStack build_classifier(const ArchitectureSpec& spec);

struct Networks {
  nn::LayerStack encoder;
  nn::LayerStack decoder;
  nn::LayerStack classifier;
};

/// All three stacks, initialised from `seed`.
Networks build_autosen(const ArchitectureSpec& spec, std::uint64_t seed);

/// (C x T x D) network input for `mode`. Throws InvalidInput if the mode needs
/// sanitized phase and the sample has none.
Tensor model_input(const csi::CsiSample& sample, Mode mode);
/// Reconstruction target for `mode` (same layout as model_input).
Tensor pretrain_target(const csi::CsiSample& sample, Mode mode);

/// Latent code for one input (C x H x W) -> (latent) or a batch (N x C x H x W) -> (N x latent).
Tensor encode(nn::LayerStack& encoder, const Tensor& x);
/// Reconstruction for one latent (latent) -> (C x H x W) or a batch.
Tensor decode(nn::LayerStack& decoder, const Tensor& h);
/// Class probabilities for one latent (latent) -> (classes) or a batch.
Tensor classify_proba(nn::LayerStack& classifier, const Tensor& h);

/// argmax of the classifier output for one input; ties go to the lowest class.
int predict(const nn::LayerStack& encoder, const nn::LayerStack& classifier, const Tensor& x);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  Mode mode = Mode::kCrossModal;
  std::size_t latent_size = 256;
  /// Epochs for few-shot calibration; 0 reuses `epochs`.
  std::size_t calibration_epochs = 0;

  void validate() const;
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

struct PretrainResult {
  nn::LayerStack encoder;
  nn::LayerStack decoder;
  std::vector<double> epoch_losses;  // mean per-sample MSE
};

/// Autoencoder pretraining with MSE between reconstruction and target,
/// shuffled mini-batches and Adam. Labels are ignored.
PretrainResult pretrain(std::span<const csi::CsiSample> unlabeled, const TrainConfig& cfg,
                        const EpochCallback& on_epoch = {});

/// Same as pretrain but starting from caller-supplied stacks.
PretrainResult pretrain(nn::LayerStack encoder, nn::LayerStack decoder,
                        std::span<const csi::CsiSample> unlabeled, const TrainConfig& cfg,
                        const EpochCallback& on_epoch = {});

/// Latent codes (N x latent) for every sample; the encoder is not modified.
Tensor encode_samples(const nn::LayerStack& encoder, std::span<const csi::CsiSample> samples,
                      Mode mode, std::size_t batch_size = 64);

struct ClassifierResult {
  nn::LayerStack classifier;
  std::vector<double> epoch_losses;  // mean cross-entropy
};

/// Trains a fresh classifier on fixed features (N x latent) with cross-entropy.
ClassifierResult train_classifier(const Tensor& features, std::span<const int> labels,
                                  const TrainConfig& cfg, std::size_t num_classes,
                                  const EpochCallback& on_epoch = {});

/// Few-shot calibration: encodes `labeled` with the frozen encoder and trains a
/// classifier head on the codes. Throws InvalidInput if a class in
/// [0, num_classes) has no sample or a sample is unlabelled.
ClassifierResult few_shot_calibrate(const nn::LayerStack& encoder,
                                    std::span<const csi::CsiSample> labeled,
                                    const TrainConfig& cfg, std::size_t num_classes,
                                    const EpochCallback& on_epoch = {});

struct SupervisedResult {
  nn::LayerStack encoder;
  nn::LayerStack classifier;
  std::vector<double> epoch_losses;
};

/// Encoder and classifier trained jointly from scratch with cross-entropy on
/// amplitude input.
SupervisedResult train_full_supervision(std::span<const csi::CsiSample> labeled,
                                        const TrainConfig& cfg, std::size_t num_classes,
                                        const EpochCallback& on_epoch = {});

struct Evaluation {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  std::vector<std::size_t> per_class_count;
  std::vector<int> predictions;
};

/// Scores predicted labels against ground truth. Throws on empty input.
Evaluation score_predictions(std::span<const int> predicted, std::span<const int> truth,
                             std::size_t num_classes);

Evaluation evaluate(const nn::LayerStack& encoder, const nn::LayerStack& classifier,
                    std::span<const csi::CsiSample> test, Mode mode, std::size_t num_classes);

}  // namespace autosen::model
