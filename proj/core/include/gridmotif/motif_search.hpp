#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridmotif/embed_store.hpp"
#include "gridmotif/encoder.hpp"
#include "gridmotif/graph.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/oracle.hpp"

namespace gridmotif {

struct GrowthStep {
  Neighborhood neighborhood;
  Embedding embedding;
  std::size_t estimate = 0;
};

/// One greedy walk. steps[i] has i + 1 nodes; every step is anchored at the
/// seed node and is an induced subgraph of corpus graph graph_index.
struct GrowthPath {
  std::vector<GrowthStep> steps;
  std::size_t graph_index = 0;
  NodeId seed_node = 0;
  std::size_t trial = 0;
};

/// One candidate per frontier node of current in target (ascending target id),
/// each the induced subgraph on current plus that node with the same anchor.
/// current must carry provenance into target, or use target's ids directly.
std::vector<Neighborhood> grow_step(const Graph& target, const Neighborhood& current,
                                    std::size_t graph_index = 0);

/// Trial `trial` draws from make_stream(seed, {trial}). Growth keeps the
/// candidate with the highest estimate; ties go to the lowest canonical key,
/// then the lowest target node id.
GrowthPath run_trial(const GraphCorpus& corpus, const RefStore& store, const EncoderParams& params,
                     std::size_t target_size, std::uint64_t seed, std::size_t trial,
                     bool respect_features = true);

struct MotifResult {
  Graph motif;
  /// First trial prefix that produced this class; its anchor is the seed.
  Neighborhood representative;
  std::string canonical_key;
  std::size_t estimated_frequency = 0;
  std::size_t support_trials = 0;
  std::vector<std::size_t> trials;
  std::optional<CountResult> exact_count;
  std::size_t rank = 0;  // 1-based

  std::size_t node_count() const { return motif.node_count(); }
};

struct MineOptions {
  std::vector<std::size_t> sizes{3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  bool respect_features = true;
};

struct MiningResult {
  std::map<std::size_t, std::vector<MotifResult>> motifs;
  std::vector<GrowthPath> paths;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string store_fingerprint;
};

/// Runs options.trials trials grown to the largest requested size and reads
/// every size off the same paths. Per size, prefixes are merged into
/// isomorphism classes and ranked by estimate, then support.
MiningResult mine_motifs(const GraphCorpus& corpus, const RefStore& store,
                         const EncoderParams& params, const MineOptions& options);

/// Fraction of growth steps whose estimate did not increase.
double monotone_step_fraction(const std::vector<GrowthPath>& paths);

std::string mining_to_json(const MiningResult& result, std::size_t top_k = 0);
MiningResult mining_from_json(std::string_view text);

}  // namespace gridmotif
