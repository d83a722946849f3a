#include <benchmark/benchmark.h>

#include "denn/datastore.hpp"
#include "denn/inference.hpp"
#include "denn/loss.hpp"
#include "denn/objective.hpp"
#include "denn/rng.hpp"

using namespace denn;

static Datastore random_store(std::size_t count, std::size_t dim, std::size_t classes) {
  Rng rng(1);
  std::vector<float> keys(count * dim);
  for (auto& k : keys) k = static_cast<float>(rng.normal());
  std::vector<LabelVector> values(count, LabelVector(classes, 0));
  for (auto& v : values) v[rng.below(classes)] = 1;
  return Datastore(dim, classes, std::move(keys), std::move(values));
}

static void BM_RetrieveTopk(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  const auto store = random_store(count, 32, 12);
  Rng rng(2);
  std::vector<double> q(32);
  for (auto& x : q) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(retrieve_topk(store, q, 30));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_RetrieveTopk)->Arg(2000)->Arg(20000)->Arg(200000);

static void BM_ContrastiveLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  Matrix s(2 * n, 2 * n);
  for (auto& x : s.data) x = rng.uniform(-1, 1);
  std::vector<LabelVector> labels(2 * n, LabelVector(12, 0));
  for (std::size_t i = 0; i < n; ++i) {
    labels[i][rng.below(12)] = 1;
    labels[i + n] = labels[i];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(contrastive_loss(s, labels, 0.05, ContrastiveVariant::dcl));
  }
}
BENCHMARK(BM_ContrastiveLoss)->Arg(8)->Arg(32)->Arg(128);

static void BM_BatchForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  EncoderConfig cfg{200, 64, 32, 12, Activation::tanh, 0.1};
  const auto enc = init_encoder(cfg, 4);
  Rng rng(5);
  std::vector<Sample> samples(n);
  for (auto& s : samples) {
    for (std::uint32_t v = 0; v < 200; v += 1 + static_cast<std::uint32_t>(rng.below(12))) {
      s.features.push_back({v, rng.uniform()});
    }
    s.labels.assign(12, 0);
    s.labels[rng.below(12)] = 1;
  }
  const ObjectiveConfig obj{};
  auto grads = EncoderParams::zeros(cfg);
  for (auto _ : state) {
    std::vector<ForwardTrace> traces;
    std::vector<LabelVector> labels;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      traces.push_back(forward(enc, samples[i % n], DropoutMode::on, rng));
      labels.push_back(samples[i % n].labels);
    }
    grads.set_zero();
    benchmark::DoNotOptimize(batch_objective(enc, traces, labels, obj, &grads));
  }
}
BENCHMARK(BM_BatchForwardBackward)->Arg(32);

static void BM_Predict(benchmark::State& state) {
  EncoderConfig cfg{200, 64, 32, 12, Activation::tanh, 0.1};
  const auto enc = init_encoder(cfg, 4);
  const auto store = random_store(static_cast<std::size_t>(state.range(0)), 32, 12);
  Sample s;
  s.features = {{3, 0.5}, {40, 0.25}, {120, 0.75}};
  s.labels.assign(12, 0);
  const InferenceConfig ic{};
  for (auto _ : state) benchmark::DoNotOptimize(predict(enc, store, s, ic));
}
BENCHMARK(BM_Predict)->Arg(2000)->Arg(20000);
BENCHMARK_MAIN();
