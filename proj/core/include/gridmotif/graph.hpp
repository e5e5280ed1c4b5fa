#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gridmotif {

using NodeId = std::uint32_t;

enum class NodeType : std::uint8_t { PQ = 0, PV = 1, REF = 2, Unknown = 3 };

inline constexpr std::size_t kNodeTypeCount = 4;

std::string_view to_string(NodeType type);
std::optional<NodeType> parse_node_type(std::string_view text);

struct NodeFeatures {
  NodeType type = NodeType::Unknown;
  /// Kilovolts; finite and non-negative when present.
  std::optional<double> voltage_kv;

  friend bool operator==(const NodeFeatures&, const NodeFeatures&) = default;
};

struct Edge {
  NodeId u;
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgePair = std::pair<NodeId, NodeId>;

/// Undirected simple graph with dense node ids 0..n-1 and per-node features.
/// Immutable once built; adjacency lists are sorted.
class Graph {
 public:
  Graph() = default;

  /// Validates and normalizes: duplicate edges collapse (counted in
  /// *duplicates when non-null), self-loops and unknown endpoints throw.
  static Graph build(std::string name, std::vector<NodeFeatures> nodes,
                     std::span<const EdgePair> edges, std::size_t* duplicates = nullptr);

  const std::string& name() const { return name_; }
  std::size_t node_count() const { return features_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return features_.empty(); }

  const NodeFeatures& features(NodeId v) const { return features_[v]; }
  const std::vector<NodeFeatures>& all_features() const { return features_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const;
  bool contains(NodeId v) const { return v < node_count(); }

  /// Sorted, each edge stored once with u < v.
  std::span<const Edge> edges() const { return edges_; }

  Graph renamed(std::string name) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::string name_;
  std::vector<NodeFeatures> features_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Edge> edges_;
};

inline Graph build_graph(std::string name, std::vector<NodeFeatures> nodes,
                         std::span<const EdgePair> edges) {
  return Graph::build(std::move(name), std::move(nodes), edges);
}

/// Induced subgraph plus the map from new ids to ids in the parent graph.
struct Subgraph {
  Graph graph;
  std::vector<NodeId> origin;
};

/// New ids follow ascending parent ids.
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source);
bool is_connected(const Graph& g);

/// Where a neighborhood came from: the corpus graph and, for every node of the
/// neighborhood graph, its id in that corpus graph.
struct NeighborhoodSource {
  std::string graph_name;
  std::size_t graph_index = 0;
  std::vector<NodeId> original_ids;

  friend bool operator==(const NeighborhoodSource&, const NeighborhoodSource&) = default;
};

/// Connected graph with a distinguished anchor node.
class Neighborhood {
 public:
  Neighborhood(Graph graph, NodeId anchor, std::optional<NeighborhoodSource> source = {});

  const Graph& graph() const { return graph_; }
  NodeId anchor() const { return anchor_; }
  const std::optional<NeighborhoodSource>& source() const { return source_; }
  std::size_t size() const { return graph_.node_count(); }

  /// Id of local node v in the source graph (v itself when untracked).
  NodeId original_id(NodeId v) const;

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;

 private:
  Graph graph_;
  NodeId anchor_;
  std::optional<NeighborhoodSource> source_;
};

/// Anchored induced neighborhood of corpus graph g on the given nodes.
Neighborhood make_neighborhood(const Graph& g, std::span<const NodeId> nodes, NodeId anchor,
                               std::size_t graph_index = 0);

/// Anchored induced neighborhood of a neighborhood; provenance is composed.
Neighborhood sub_neighborhood(const Neighborhood& parent, std::span<const NodeId> nodes,
                              NodeId anchor);

Neighborhood k_hop_neighborhood(const Graph& g, NodeId anchor, std::size_t k);

/// Largest shortest-path distance from the anchor.
std::size_t anchor_eccentricity(const Neighborhood& n);

/// Bijection preserving adjacency and, when respect_features, node features.
bool is_isomorphic(const Graph& a, const Graph& b, bool respect_features = true);

/// Three rounds of color refinement serialized to a sorted string. Isomorphic
/// graphs always share a key; equal keys must be confirmed with is_isomorphic.
std::string canonical_key(const Graph& g, bool respect_features = true);

}  // namespace gridmotif
