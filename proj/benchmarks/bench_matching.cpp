#include <benchmark/benchmark.h>

#include "gridmotif/graph.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/synthetic.hpp"

namespace {

using namespace gridmotif;

Graph grid_target(std::size_t side) {
  Rng rng = make_stream(9, {});
  return grid_with_chords(side, side, side, rng);
}

void BM_vf2_count_path(benchmark::State& state) {
  const auto target = grid_target(static_cast<std::size_t>(state.range(0)));
  const auto query = path_graph(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vf2_count(target, query, {MatchMode::Induced, false, false}));
  }
  state.SetLabel(std::to_string(target.node_count()) + " nodes");
}
BENCHMARK(BM_vf2_count_path)->Arg(6)->Arg(12);

void BM_vf2_count_cycle_mono(benchmark::State& state) {
  const auto target = grid_target(static_cast<std::size_t>(state.range(0)));
  const auto query = cycle_graph(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vf2_count(target, query, {MatchMode::Monomorphism, false, false}));
  }
}
BENCHMARK(BM_vf2_count_cycle_mono)->Arg(6)->Arg(12);

void BM_canonical_key(benchmark::State& state) {
  Rng rng = make_stream(4, {});
  const auto g = assign_grid_features(grid_with_chords(4, 4, 4, rng), rng);
  for (auto _ : state) benchmark::DoNotOptimize(canonical_key(g));
}
BENCHMARK(BM_canonical_key);

}  // namespace
