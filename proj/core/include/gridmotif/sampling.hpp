#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridmotif/graph.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/rng.hpp"

namespace gridmotif {

/// Inclusive node-count range.
struct SizeRange {
  std::size_t min = 3;
  std::size_t max = 25;
};

struct TrainingPair {
  Neighborhood query;   // G_u
  Neighborhood target;  // G_v
  bool label = false;   // anchored containment of query in target
};

struct Dataset {
  std::vector<TrainingPair> pairs;
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::uint64_t seed = 0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct PairOptions {
  /// Query size range for positives; defaults to [1, |target|].
  std::optional<SizeRange> shrink;
  std::size_t retry_cap = 100;
  double validation_fraction = 0.1;
  /// Containment relation the labels encode. anchored is forced on.
  MatchSemantics semantics;
};

/// Uniform anchor (among nodes whose component can reach range.min), then a
/// BFS with shuffled neighbor order until a size drawn from range is reached.
Neighborhood sample_neighborhood(const Graph& g, Rng& rng, SizeRange range,
                                 std::size_t graph_index = 0);

/// count neighborhoods; each draw picks a graph by size weight and uses its own
/// stream derived from (seed, draw index).
std::vector<Neighborhood> decompose(const GraphCorpus& corpus, std::size_t count, SizeRange range,
                                    std::uint64_t seed);

TrainingPair make_positive_pair(const Neighborhood& target, Rng& rng, const PairOptions& options = {});

/// Half random pool pairs, half perturbed positives; every candidate is kept
/// only if the exact oracle rejects containment.
TrainingPair make_negative_pair(std::span<const Neighborhood> pool, Rng& rng,
                                const PairOptions& options = {});

/// Even pair indices are positive, odd ones negative. Split is stratified by
/// label.
Dataset build_dataset(std::span<const Neighborhood> pool, std::size_t n_pairs, std::uint64_t seed,
                      const PairOptions& options = {});

Dataset build_dataset(const GraphCorpus& corpus, std::size_t n_pairs, SizeRange range,
                      std::uint64_t seed, const PairOptions& options = {});

std::string dataset_to_jsonl(const Dataset& dataset);
Dataset dataset_from_jsonl(std::string_view text);

std::string neighborhoods_to_jsonl(std::span<const Neighborhood> neighborhoods);
std::vector<Neighborhood> neighborhoods_from_jsonl(std::string_view text);

}  // namespace gridmotif
