#include <benchmark/benchmark.h>

#include "gridmotif/embed_store.hpp"

namespace {

using namespace gridmotif;

RefStore random_store(std::size_t size, std::size_t dim) {
  Rng rng = make_stream(2, {});
  RefStore store;
  store.threshold = 0.1;
  for (std::size_t i = 0; i < size; ++i) {
    Embedding e;
    e.values.resize(static_cast<Eigen::Index>(dim));
    for (auto& x : e.values) x = uniform_real(rng);
    store.vectors.push_back(std::move(e));
  }
  return store;
}

void BM_estimate_frequency(benchmark::State& state) {
  const auto store = random_store(static_cast<std::size_t>(state.range(0)), 64);
  const auto query = store.vectors.front();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_frequency(store, query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_estimate_frequency)->Arg(10000)->Arg(100000);

}  // namespace
