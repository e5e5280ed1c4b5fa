#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string_view>

#include "gridmotif/graph.hpp"

namespace gridmotif {

enum class MatchMode { Induced, Monomorphism };

std::string_view to_string(MatchMode mode);

struct MatchSemantics {
  MatchMode mode = MatchMode::Induced;
  /// Only honored by the Neighborhood overloads: the query anchor must map
  /// onto the target anchor.
  bool anchored = false;
  bool respect_features = true;
};

struct OracleBudget {
  std::chrono::milliseconds timeout{60'000};
};

/// Occurrence count; complete is false when the wall-clock budget ran out and
/// count is only a lower bound.
struct CountResult {
  std::uint64_t count = 0;
  bool complete = true;
};

/// Distinct occurrences of query in target. Induced mode counts node sets
/// whose induced subgraph is isomorphic to query; monomorphism counts
/// distinct (node set, edge set) images. Automorphisms never inflate counts.
CountResult vf2_count(const Graph& target, const Graph& query, const MatchSemantics& sem = {},
                      const OracleBudget& budget = {});

CountResult vf2_count(const Neighborhood& target, const Neighborhood& query,
                      const MatchSemantics& sem = {}, const OracleBudget& budget = {});

/// True iff query occurs in target with anchor mapped onto anchor. Throws
/// Timeout when the budget runs out before a decision.
bool anchored_contains(const Neighborhood& target, const Neighborhood& query,
                       const MatchSemantics& sem = {}, const OracleBudget& budget = {});

/// Exhaustive subset-and-permutation enumeration. Targets above 10 nodes are
/// rejected with TooLarge.
std::uint64_t brute_force_count(const Graph& target, const Graph& query,
                                const MatchSemantics& sem = {});

/// Number of (graph, node) pairs whose k-hop neighborhood contains the anchored
/// query. k must cover the anchor's eccentricity in the query.
CountResult exact_support(std::span<const Graph> graphs, const Neighborhood& query, std::size_t k,
                          const MatchSemantics& sem = {}, const OracleBudget& budget = {});

}  // namespace gridmotif
