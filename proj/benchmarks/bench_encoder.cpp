#include <benchmark/benchmark.h>

#include "gridmotif/encoder.hpp"
#include "gridmotif/sampling.hpp"
#include "gridmotif/synthetic.hpp"

namespace {

using namespace gridmotif;

struct Inputs {
  GraphCorpus corpus = synthetic_corpus({.graph_count = 40}, 3);
  std::vector<Neighborhood> pool = decompose(corpus, 256, {3, 15}, 5);
  EncoderParams params = EncoderParams::initialize(FeatureSpec{corpus.voltage_buckets}, {}, 1);
};

const Inputs& inputs() {
  static const Inputs in;
  return in;
}

void BM_encode(benchmark::State& state) {
  const auto& in = inputs();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(in.params, in.pool[i++ % in.pool.size()]));
  }
}
BENCHMARK(BM_encode);

void BM_loss_and_gradient(benchmark::State& state) {
  const auto& in = inputs();
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  std::vector<PairRef> batch;
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.push_back({&in.pool[(2 * i) % in.pool.size()], &in.pool[(2 * i + 1) % in.pool.size()], i % 2 == 0});
  }
  std::vector<std::uint64_t> keys(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) keys[i] = i;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(in.params, batch, 0.5, Reduction::Mean, 8, 1, keys));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_loss_and_gradient)->Arg(8)->Arg(64);

}  // namespace
