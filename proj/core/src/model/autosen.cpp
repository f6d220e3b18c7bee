#include "autosen/model/autosen.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "autosen/error.hpp"
#include "autosen/nn/adam.hpp"
#include "autosen/nn/loss.hpp"
#include "autosen/random.hpp"

namespace autosen::model {

namespace {

using nn::Extent2d;

// Encoder convolution stages: (out channels, kernel == stride).
struct ConvStage {
  std::size_t channels;
  Extent2d kernel;
};
constexpr std::array<ConvStage, 3> kStages{{{32, {10, 5}}, {64, {10, 3}}, {96, {5, 1}}}};

// Stream ids for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kClassifierInitStream = 3;
constexpr std::uint64_t kClassifierShuffleStream = 4;

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

Tensor gather(std::span<const Tensor> items, std::span<const std::size_t> order) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(order.size());
  for (auto i : order) ptrs.push_back(&items[i]);
  return stack(ptrs);
}

Tensor gather_rows(const Tensor& matrix, std::span<const std::size_t> rows) {
  const std::size_t width = matrix.dim(1);
  Tensor out({rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out.at(r, c) = matrix.at(rows[r], c);
  }
  return out;
}

std::vector<Tensor> inputs_for(std::span<const csi::CsiSample> samples, Mode mode) {
  std::vector<Tensor> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(model_input(s, mode));
  return out;
}

std::vector<int> labels_for(std::span<const csi::CsiSample> samples, std::size_t num_classes) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].label) {
      throw InvalidInput("labelled set: sample " + std::to_string(i) + " has no label");
    }
    const int y = *samples[i].label;
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw InvalidInput("labelled set: label " + std::to_string(y) + " outside [0, " +
                         std::to_string(num_classes) + ")");
    }
    labels.push_back(y);
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw InvalidInput("labelled set: class " + std::to_string(c) + " has no samples");
    }
  }
  return labels;
}

ArchitectureSpec architecture_for(const TrainConfig& cfg, const csi::CsiSample& first,
                                  std::size_t num_classes) {
  ArchitectureSpec spec;
  spec.latent_size = cfg.latent_size;
  spec.input_channels = input_channels(cfg.mode);
  spec.output_channels = target_channels(cfg.mode);
  spec.num_classes = num_classes;
  spec.height = first.timestamps();
  spec.width = first.channels();
  return spec;
}

template <typename Step>
std::vector<double> run_epochs(std::size_t count, const TrainConfig& cfg, std::uint64_t stream,
                               const EpochCallback& on_epoch, Step&& step) {
  Rng shuffler(derive_seed(cfg.seed, stream));
  std::vector<std::size_t> order = identity_order(count);
  std::vector<double> losses;
  losses.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), shuffler);
    double total = 0.0;
    for (std::size_t first = 0; first < count; first += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, count - first);
      const std::span<const std::size_t> batch(order.data() + first, n);
      total += step(batch) * static_cast<double>(n);
    }
    losses.push_back(total / static_cast<double>(count));
    if (on_epoch) on_epoch(epoch, losses.back());
  }
  return losses;
}

std::vector<nn::Parameter*> joined_parameters(nn::LayerStack& a, nn::LayerStack& b) {
  auto params = a.parameters();
  for (auto* p : b.parameters()) params.push_back(p);
  return params;
}

}  // namespace

std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::kCrossModal:
      return "cross-modal";
    case Mode::kAmpOnly:
      return "amp-only";
    case Mode::kPhaOnly:
      return "pha-only";
    case Mode::kConcat:
      return "concat";
    case Mode::kFullSup:
      return "fullsup";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes) {
    if (mode_name(m) == name) return m;
  }
  throw InvalidInput("unknown mode '" + std::string(name) +
                     "' (expected cross-modal, amp-only, pha-only, concat or fullsup)");
}

std::size_t input_channels(Mode mode) noexcept { return mode == Mode::kConcat ? 2 : 1; }
std::size_t target_channels(Mode mode) noexcept { return mode == Mode::kConcat ? 2 : 1; }

bool needs_sanitized_phase(Mode mode) noexcept {
  return mode == Mode::kCrossModal || mode == Mode::kPhaOnly || mode == Mode::kConcat;
}

void ArchitectureSpec::validate() const {
  if (latent_size == 0) throw InvalidInput("architecture: latent_size must be >= 1");
  if (input_channels == 0 || output_channels == 0) {
    throw InvalidInput("architecture: channel counts must be >= 1");
  }
  if (num_classes < 2) throw InvalidInput("architecture: need at least 2 classes");
}

nn::LayerStack build_encoder(const ArchitectureSpec& spec) {
  spec.validate();
  nn::LayerStack enc;
  std::size_t channels = spec.input_channels;
  for (const auto& stage : kStages) {
    enc.emplace<nn::Conv2d>(channels, stage.channels, stage.kernel, stage.kernel);
    enc.emplace<nn::ReLU>();
    channels = stage.channels;
  }
  const nn::Shape conv_out = enc.output_shape(spec.input_shape());
  const std::size_t flat = element_count(conv_out);
  enc.emplace<nn::Reshape>(nn::Shape{flat});
  enc.emplace<nn::Dense>(flat, spec.latent_size);
  enc.emplace<nn::ReLU>();
  return enc;
}

nn::LayerStack build_decoder(const ArchitectureSpec& spec) {
  spec.validate();
  // Only exact divisions invert; otherwise the reconstruction cannot match the target.
  std::size_t h = spec.height;
  std::size_t w = spec.width;
  for (const auto& stage : kStages) {
    if (h % stage.kernel.h != 0 || w % stage.kernel.w != 0) {
      throw InvalidInput("decoder: input " + shape_string(spec.input_shape()) +
                         " is not divisible through the encoder strides, cannot mirror");
    }
    h /= stage.kernel.h;
    w /= stage.kernel.w;
  }
  const std::size_t bottleneck = kStages.back().channels;
  nn::LayerStack dec;
  dec.emplace<nn::Dense>(spec.latent_size, bottleneck * h * w);
  dec.emplace<nn::ReLU>();
  dec.emplace<nn::Reshape>(nn::Shape{bottleneck, h, w});
  std::size_t channels = bottleneck;
  for (std::size_t s = kStages.size(); s-- > 0;) {
    const std::size_t out = s == 0 ? spec.output_channels : kStages[s - 1].channels;
    dec.emplace<nn::ConvTranspose2d>(channels, out, kStages[s].kernel, kStages[s].kernel);
    if (s != 0) dec.emplace<nn::ReLU>();
    channels = out;
  }
  return dec;
}

nn::LayerStack build_classifier(const ArchitectureSpec& spec) {
  spec.validate();
  nn::LayerStack cls;
  cls.emplace<nn::Dense>(spec.latent_size, 256);
  cls.emplace<nn::ReLU>();
  cls.emplace<nn::Dense>(256, 128);
  cls.emplace<nn::ReLU>();
  cls.emplace<nn::Dense>(128, spec.num_classes);
  return cls;
}

Networks build_autosen(const ArchitectureSpec& spec, std::uint64_t seed) {
  Networks nets{build_encoder(spec), build_decoder(spec), build_classifier(spec)};
  Rng rng(seed);
  nets.encoder.initialize(rng);
  nets.decoder.initialize(rng);
  nets.classifier.initialize(rng);
  return nets;
}

Tensor model_input(const csi::CsiSample& sample, Mode mode) {
  const std::size_t t = sample.timestamps();
  const std::size_t d = sample.channels();
  const auto& sanitized = sample.phase_sanitized();
  if (needs_sanitized_phase(mode) && mode != Mode::kCrossModal && !sanitized) {
    throw InvalidInput(std::string("mode ") + std::string(mode_name(mode)) +
                       " needs sanitized phase; run sanitization first");
  }
  switch (mode) {
    case Mode::kCrossModal:
    case Mode::kAmpOnly:
    case Mode::kFullSup:
      return sample.amplitude.reshaped({1, t, d});
    case Mode::kPhaOnly:
      return sanitized->reshaped({1, t, d});
    case Mode::kConcat: {
      Tensor out({2, t, d});
      std::copy(sample.amplitude.data().begin(), sample.amplitude.data().end(), out.data().begin());
      std::copy(sanitized->data().begin(), sanitized->data().end(),
                out.data().begin() + static_cast<std::ptrdiff_t>(t * d));
      return out;
    }
  }
  throw InvalidInput("model_input: unknown mode");
}

Tensor pretrain_target(const csi::CsiSample& sample, Mode mode) {
  if (mode == Mode::kFullSup) throw InvalidInput("fullsup mode has no reconstruction target");
  if (mode == Mode::kCrossModal) {
    if (!sample.phase_sanitized()) {
      throw InvalidInput("mode cross-modal needs sanitized phase; run sanitization first");
    }
    return sample.phase_sanitized()->reshaped({1, sample.timestamps(), sample.channels()});
  }
  return model_input(sample, mode);
}

namespace {

// Runs `stack` on either one unbatched item or a batch.
Tensor apply(nn::LayerStack& stack, const Tensor& x, std::size_t sample_rank) {
  if (x.rank() == sample_rank) {
    nn::Shape batched{1};
    batched.insert(batched.end(), x.shape().begin(), x.shape().end());
    Tensor y = stack.forward(x.reshaped(batched));
    nn::Shape out(y.shape().begin() + 1, y.shape().end());
    return std::move(y).reshaped(std::move(out));
  }
  if (x.rank() == sample_rank + 1) return stack.forward(x);
  throw ShapeError("expected rank " + std::to_string(sample_rank) + " or batched input, got " +
                   shape_string(x.shape()));
}

}  // namespace

Tensor encode(nn::LayerStack& encoder, const Tensor& x) { return apply(encoder, x, 3); }

Tensor decode(nn::LayerStack& decoder, const Tensor& h) { return apply(decoder, h, 1); }

Tensor classify_proba(nn::LayerStack& classifier, const Tensor& h) {
  const Tensor logits = apply(classifier, h, 1);
  if (logits.rank() == 1) {
    const auto p = nn::softmax(logits.data());
    return Tensor({p.size()}, p);
  }
  return nn::softmax_rows(logits);
}

int predict(const nn::LayerStack& encoder, const nn::LayerStack& classifier, const Tensor& x) {
  nn::LayerStack enc = encoder;
  nn::LayerStack cls = classifier;
  const Tensor p = classify_proba(cls, encode(enc, x));
  return static_cast<int>(nn::argmax(p.data()));
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidInput("train config: epochs must be >= 1");
  if (batch_size == 0) throw InvalidInput("train config: batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw InvalidInput("train config: lr must be positive");
  if (latent_size == 0) throw InvalidInput("train config: latent_size must be >= 1");
}

PretrainResult pretrain(std::span<const csi::CsiSample> unlabeled, const TrainConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.validate();
  if (unlabeled.empty()) throw InvalidInput("pretrain: empty dataset");
  if (cfg.mode == Mode::kFullSup) throw InvalidInput("pretrain: fullsup mode is supervised");
  const ArchitectureSpec spec = architecture_for(cfg, unlabeled.front(), 2);
  Rng rng(derive_seed(cfg.seed, kInitStream));
  nn::LayerStack encoder = build_encoder(spec);
  nn::LayerStack decoder = build_decoder(spec);
  encoder.initialize(rng);
  decoder.initialize(rng);
  return pretrain(std::move(encoder), std::move(decoder), unlabeled, cfg, on_epoch);
}

PretrainResult pretrain(nn::LayerStack encoder, nn::LayerStack decoder,
                        std::span<const csi::CsiSample> unlabeled, const TrainConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.validate();
  if (unlabeled.empty()) throw InvalidInput("pretrain: empty dataset");
  if (cfg.mode == Mode::kFullSup) throw InvalidInput("pretrain: fullsup mode is supervised");

  std::vector<Tensor> inputs;
  std::vector<Tensor> targets;
  inputs.reserve(unlabeled.size());
  targets.reserve(unlabeled.size());
  for (const auto& s : unlabeled) {
    inputs.push_back(model_input(s, cfg.mode));
    targets.push_back(pretrain_target(s, cfg.mode));
  }

  nn::AdamState adam(nn::AdamOptions{.lr = cfg.lr});
  const auto params = joined_parameters(encoder, decoder);
  auto losses = run_epochs(unlabeled.size(), cfg, kShuffleStream, on_epoch,
                           [&](std::span<const std::size_t> batch) {
                             const Tensor x = gather(inputs, batch);
                             const Tensor y = gather(targets, batch);
                             const auto loss = nn::mse_loss(decoder.forward(encoder.forward(x)), y);
                             encoder.zero_grad();
                             decoder.zero_grad();
                             encoder.backward(decoder.backward(loss.grad));
                             nn::adam_step(params, adam);
                             return loss.value;
                           });
  encoder.clear_caches();
  decoder.clear_caches();
  return PretrainResult{std::move(encoder), std::move(decoder), std::move(losses)};
}

Tensor encode_samples(const nn::LayerStack& encoder, std::span<const csi::CsiSample> samples,
                      Mode mode, std::size_t batch_size) {
  if (samples.empty()) throw InvalidInput("encode_samples: no samples");
  if (batch_size == 0) batch_size = 1;
  nn::LayerStack enc = encoder;
  Tensor codes;
  for (std::size_t first = 0; first < samples.size(); first += batch_size) {
    const std::size_t n = std::min(batch_size, samples.size() - first);
    std::vector<Tensor> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) items.push_back(model_input(samples[first + i], mode));
    const Tensor h = enc.forward(gather(items, identity_order(n)));
    if (codes.empty()) codes = Tensor({samples.size(), h.dim(1)});
    std::copy(h.data().begin(), h.data().end(),
              codes.data().begin() + static_cast<std::ptrdiff_t>(first * h.dim(1)));
  }
  return codes;
}

ClassifierResult train_classifier(const Tensor& features, std::span<const int> labels,
                                  const TrainConfig& cfg, std::size_t num_classes,
                                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (features.rank() != 2 || features.dim(0) != labels.size() || labels.empty()) {
    throw ShapeError("train_classifier: features " + shape_string(features.shape()) + " for " +
                     std::to_string(labels.size()) + " labels");
  }
  ArchitectureSpec spec;
  spec.latent_size = features.dim(1);
  spec.num_classes = num_classes;
  nn::LayerStack classifier = build_classifier(spec);
  Rng rng(derive_seed(cfg.seed, kClassifierInitStream));
  classifier.initialize(rng);

  nn::AdamState adam(nn::AdamOptions{.lr = cfg.lr});
  const auto params = classifier.parameters();
  auto losses = run_epochs(labels.size(), cfg, kClassifierShuffleStream, on_epoch,
                           [&](std::span<const std::size_t> batch) {
                             std::vector<int> y;
                             y.reserve(batch.size());
                             for (auto i : batch) y.push_back(labels[i]);
                             const auto loss = nn::cross_entropy_loss(
                                 classifier.forward(gather_rows(features, batch)), y);
                             classifier.zero_grad();
                             classifier.backward(loss.grad);
                             nn::adam_step(params, adam);
                             return loss.value;
                           });
  classifier.clear_caches();
  return ClassifierResult{std::move(classifier), std::move(losses)};
}

ClassifierResult few_shot_calibrate(const nn::LayerStack& encoder,
                                    std::span<const csi::CsiSample> labeled,
                                    const TrainConfig& cfg, std::size_t num_classes,
                                    const EpochCallback& on_epoch) {
  const auto labels = labels_for(labeled, num_classes);
  const Tensor codes = encode_samples(encoder, labeled, cfg.mode, cfg.batch_size);
  TrainConfig cal = cfg;
  if (cfg.calibration_epochs) cal.epochs = cfg.calibration_epochs;
  return train_classifier(codes, labels, cal, num_classes, on_epoch);
}

SupervisedResult train_full_supervision(std::span<const csi::CsiSample> labeled,
                                        const TrainConfig& cfg, std::size_t num_classes,
                                        const EpochCallback& on_epoch) {
  cfg.validate();
  if (labeled.empty()) throw InvalidInput("train_full_supervision: empty dataset");
  const auto labels = labels_for(labeled, num_classes);
  TrainConfig amp_cfg = cfg;
  amp_cfg.mode = Mode::kFullSup;
  const ArchitectureSpec spec = architecture_for(amp_cfg, labeled.front(), num_classes);
  nn::LayerStack encoder = build_encoder(spec);
  nn::LayerStack classifier = build_classifier(spec);
  Rng rng(derive_seed(cfg.seed, kInitStream));
  encoder.initialize(rng);
  Rng cls_rng(derive_seed(cfg.seed, kClassifierInitStream));
  classifier.initialize(cls_rng);

  const auto inputs = inputs_for(labeled, Mode::kFullSup);
  nn::AdamState adam(nn::AdamOptions{.lr = cfg.lr});
  const auto params = joined_parameters(encoder, classifier);
  auto losses = run_epochs(labeled.size(), cfg, kShuffleStream, on_epoch,
                           [&](std::span<const std::size_t> batch) {
                             std::vector<int> y;
                             y.reserve(batch.size());
                             for (auto i : batch) y.push_back(labels[i]);
                             const auto loss = nn::cross_entropy_loss(
                                 classifier.forward(encoder.forward(gather(inputs, batch))), y);
                             encoder.zero_grad();
                             classifier.zero_grad();
                             encoder.backward(classifier.backward(loss.grad));
                             nn::adam_step(params, adam);
                             return loss.value;
                           });
  encoder.clear_caches();
  classifier.clear_caches();
  return SupervisedResult{std::move(encoder), std::move(classifier), std::move(losses)};
}

Evaluation score_predictions(std::span<const int> predicted, std::span<const int> truth,
                             std::size_t num_classes) {
  if (truth.empty()) throw InvalidInput("evaluate: empty test set");
  if (predicted.size() != truth.size()) {
    throw InvalidInput("evaluate: prediction and label counts differ");
  }
  Evaluation ev;
  ev.per_class_count.assign(num_classes, 0);
  std::vector<std::size_t> hits(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int y = truth[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw InvalidInput("evaluate: label " + std::to_string(y) + " out of range");
    }
    ++ev.per_class_count[static_cast<std::size_t>(y)];
    if (predicted[i] == y) {
      ++correct;
      ++hits[static_cast<std::size_t>(y)];
    }
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  ev.per_class_accuracy.resize(num_classes, 0.0);
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (ev.per_class_count[c] > 0) {
      ev.per_class_accuracy[c] =
          static_cast<double>(hits[c]) / static_cast<double>(ev.per_class_count[c]);
    }
  }
  ev.predictions.assign(predicted.begin(), predicted.end());
  return ev;
}

Evaluation evaluate(const nn::LayerStack& encoder, const nn::LayerStack& classifier,
                    std::span<const csi::CsiSample> test, Mode mode, std::size_t num_classes) {
  if (test.empty()) throw InvalidInput("evaluate: empty test set");
  std::vector<int> truth;
  truth.reserve(test.size());
  for (const auto& s : test) {
    if (!s.label) throw InvalidInput("evaluate: test sample without label");
    truth.push_back(*s.label);
  }
  const Tensor codes = encode_samples(encoder, test, mode);
  nn::LayerStack cls = classifier;
  const Tensor logits = cls.forward(codes);
  std::vector<int> predicted;
  predicted.reserve(test.size());
  const std::size_t classes = logits.dim(1);
  for (std::size_t s = 0; s < test.size(); ++s) {
    predicted.push_back(static_cast<int>(nn::argmax(logits.data().subspan(s * classes, classes))));
  }
  return score_predictions(predicted, truth, num_classes);
}

}  // namespace autosen::model
