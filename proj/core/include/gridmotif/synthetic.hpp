#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridmotif/graph.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/rng.hpp"
#include "gridmotif/sampling.hpp"

namespace gridmotif {

// Topology generators for test corpora. All nodes carry default features
// unless passed through assign_grid_features.

/// Uniform random recursive tree: node i attaches to a uniform earlier node.
Graph random_tree(std::size_t n, Rng& rng, std::string name = "tree");

/// rows x cols lattice plus `chords` extra edges between random non-adjacent
/// node pairs.
Graph grid_with_chords(std::size_t rows, std::size_t cols, std::size_t chords, Rng& rng,
                       std::string name = "grid");

/// Hub-and-spoke hierarchy: every internal node has between 2 and
/// max_branching children, down to the given depth.
Graph star_hierarchy(std::size_t depth, std::size_t max_branching, Rng& rng,
                     std::string name = "star");

/// Triangle strip grown by attaching each new node to both ends of a random
/// existing edge, followed by `fringe` tree nodes hung off random nodes.
Graph triangle_rich(std::size_t core_nodes, std::size_t fringe, Rng& rng,
                    std::string name = "triangles");

Graph path_graph(std::size_t n, std::string name = "path");
Graph cycle_graph(std::size_t n, std::string name = "cycle");
Graph complete_graph(std::size_t n, std::string name = "complete");
Graph star_graph(std::size_t leaves, std::string name = "star");

/// Power-grid-like labels: one REF bus, about a fifth PV, the rest PQ; a base
/// voltage per graph with a tenth of the buses on a second level.
Graph assign_grid_features(const Graph& g, Rng& rng);

enum class SyntheticFamily { Tree, Grid, Star, Triangle };

struct SyntheticCorpusOptions {
  std::vector<SyntheticFamily> families{SyntheticFamily::Tree, SyntheticFamily::Grid,
                                        SyntheticFamily::Star};
  std::size_t graph_count = 200;
  /// Approximate node count per graph.
  SizeRange graph_size{20, 60};
  bool features = true;
  double bucket_width_kv = 1.0;
};

/// Families are used round-robin; graph i draws from make_stream(seed, {i}).
GraphCorpus synthetic_corpus(const SyntheticCorpusOptions& options, std::uint64_t seed);

}  // namespace gridmotif
