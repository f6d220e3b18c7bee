#include <benchmark/benchmark.h>

#include "autosen/csi/csi.hpp"
#include "autosen/model/autosen.hpp"
#include "autosen/nn/adam.hpp"
#include "autosen/nn/loss.hpp"
#include "autosen/random.hpp"
#include "autosen/synth/channel.hpp"

using namespace autosen;

namespace {

Tensor random_batch(Tensor::Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

std::size_t batch_arg(const benchmark::State& state) { return static_cast<std::size_t>(state.range(0)); }

void BM_FirstConvForward(benchmark::State& state) {
  auto nets = model::build_autosen({}, 0);
  auto& conv = nets.encoder.layer(0);
  const Tensor x = random_batch({batch_arg(state), 1, 500, 90}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FirstConvForward)->Arg(1)->Arg(8)->Arg(64);

void BM_FirstConvBackward(benchmark::State& state) {
  auto nets = model::build_autosen({}, 0);
  auto& conv = nets.encoder.layer(0);
  const Tensor x = random_batch({batch_arg(state), 1, 500, 90}, 1);
  const Tensor y = conv.forward(x);
  const Tensor g = random_batch(y.shape(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(g));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FirstConvBackward)->Arg(1)->Arg(8)->Arg(64);

void BM_EncoderForward(benchmark::State& state) {
  auto nets = model::build_autosen({}, 0);
  const Tensor x = random_batch({batch_arg(state), 1, 500, 90}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(nets.encoder.forward(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(1)->Arg(8)->Arg(64);

void BM_DecoderForward(benchmark::State& state) {
  auto nets = model::build_autosen({}, 0);
  const Tensor h = random_batch({batch_arg(state), 256}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nets.decoder.forward(h));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecoderForward)->Arg(1)->Arg(8)->Arg(64);

// One autoencoder optimisation step: forward, MSE, backward, Adam.
void BM_PretrainStep(benchmark::State& state) {
  auto nets = model::build_autosen({}, 0);
  const Tensor x = random_batch({batch_arg(state), 1, 500, 90}, 1);
  const Tensor target = random_batch({batch_arg(state), 1, 500, 90}, 4);
  auto params = nets.encoder.parameters();
  for (auto* p : nets.decoder.parameters()) params.push_back(p);
  nn::AdamState adam{nn::AdamOptions{}};
  for (auto _ : state) {
    nets.encoder.zero_grad();
    nets.decoder.zero_grad();
    const auto loss = nn::mse_loss(nets.decoder.forward(nets.encoder.forward(x)), target);
    nets.encoder.backward(nets.decoder.backward(loss.grad));
    nn::adam_step(params, adam);
    benchmark::DoNotOptimize(loss.value);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PretrainStep)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SanitizeSample(benchmark::State& state) {
  const csi::CsiSample s(random_batch({500, 90}, 5), random_batch({500, 90}, 6), std::nullopt, 500.0);
  const auto m = csi::intel5300_subcarrier_indices();
  for (auto _ : state) benchmark::DoNotOptimize(csi::sanitize_sample(s, 3, 30, m));
}
BENCHMARK(BM_SanitizeSample);

void BM_SynthesizeSample(benchmark::State& state) {
  synth::ChannelConfig cfg;
  const auto classes = synth::default_activity_classes(3);
  Rng rng(7);
  std::vector<synth::PathSpec> paths;
  for (const auto& gen : classes[1].paths) paths.push_back(gen.draw(rng, cfg.antennas));
  for (auto _ : state) benchmark::DoNotOptimize(synth::synthesize_frames(paths, cfg, 500, 0));
}
BENCHMARK(BM_SynthesizeSample);

}  // namespace

BENCHMARK_MAIN();
