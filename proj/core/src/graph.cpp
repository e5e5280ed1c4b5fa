#include "gridmotif/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>

#include "gridmotif/error.hpp"
#include "hash.hpp"

namespace gridmotif {

std::string_view to_string(NodeType type) {
  switch (type) {
    case NodeType::PQ: return "PQ";
    case NodeType::PV: return "PV";
    case NodeType::REF: return "REF";
    case NodeType::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::optional<NodeType> parse_node_type(std::string_view text) {
  if (text == "PQ") return NodeType::PQ;
  if (text == "PV") return NodeType::PV;
  if (text == "REF") return NodeType::REF;
  if (text == "UNKNOWN") return NodeType::Unknown;
  return std::nullopt;
}

Graph Graph::build(std::string name, std::vector<NodeFeatures> nodes,
                   std::span<const EdgePair> edges, std::size_t* duplicates) {
  const auto n = nodes.size();
  for (std::size_t v = 0; v < n; ++v) {
    const auto& kv = nodes[v].voltage_kv;
    if (kv && (!std::isfinite(*kv) || *kv < 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "node " + std::to_string(v) + ": voltage must be finite and non-negative");
    }
  }

  std::vector<Edge> normalized;
  normalized.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a >= n || b >= n) {
      throw Error(ErrorCode::InvalidEdge, "edge (" + std::to_string(a) + "," + std::to_string(b) +
                                              ") references an unknown node");
    }
    if (a == b) {
      throw Error(ErrorCode::SelfLoop, "self-loop on node " + std::to_string(a));
    }
    normalized.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(normalized.begin(), normalized.end());
  const auto before = normalized.size();
  normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
  if (duplicates) *duplicates = before - normalized.size();

  Graph g;
  g.name_ = std::move(name);
  g.features_ = std::move(nodes);
  g.adjacency_.assign(n, {});
  for (const auto& e : normalized) {
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  g.edges_ = std::move(normalized);
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= node_count() || v >= node_count()) return false;
  const auto& adj = adjacency_[u].size() <= adjacency_[v].size() ? adjacency_[u] : adjacency_[v];
  const NodeId other = adjacency_[u].size() <= adjacency_[v].size() ? v : u;
  return std::binary_search(adj.begin(), adj.end(), other);
}

Graph Graph::renamed(std::string name) const {
  Graph g = *this;
  g.name_ = std::move(name);
  return g;
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) throw Error(ErrorCode::EmptySet, "induced_subgraph: empty node set");
  std::vector<NodeId> origin(nodes.begin(), nodes.end());
  std::sort(origin.begin(), origin.end());
  origin.erase(std::unique(origin.begin(), origin.end()), origin.end());
  if (origin.back() >= g.node_count()) {
    throw Error(ErrorCode::UnknownNode, "induced_subgraph: node " + std::to_string(origin.back()) +
                                            " not in graph");
  }

  constexpr auto kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(g.node_count(), kAbsent);
  std::vector<NodeFeatures> features;
  features.reserve(origin.size());
  for (NodeId i = 0; i < origin.size(); ++i) {
    local[origin[i]] = i;
    features.push_back(g.features(origin[i]));
  }

  std::vector<EdgePair> edges;
  for (NodeId i = 0; i < origin.size(); ++i) {
    for (NodeId w : g.neighbors(origin[i])) {
      const NodeId j = local[w];
      if (j != kAbsent && i < j) edges.emplace_back(i, j);
    }
  }
  return Subgraph{Graph::build(g.name(), std::move(features), edges), std::move(origin)};
}

std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source) {
  constexpr auto kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(g.node_count(), kInf);
  if (!g.contains(source)) throw Error(ErrorCode::UnknownNode, "bfs: unknown node");
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (NodeId w : g.neighbors(v)) {
      if (dist[w] == kInf) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

bool is_connected(const Graph& g) {
  if (g.empty()) return false;
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](std::size_t d) { return d == std::numeric_limits<std::size_t>::max(); });
}

Neighborhood::Neighborhood(Graph graph, NodeId anchor, std::optional<NeighborhoodSource> source)
    : graph_(std::move(graph)), anchor_(anchor), source_(std::move(source)) {
  if (!graph_.contains(anchor_)) {
    throw Error(ErrorCode::UnknownNode, "neighborhood anchor " + std::to_string(anchor_) +
                                            " is not a node of the graph");
  }
  if (!is_connected(graph_)) {
    throw Error(ErrorCode::InvalidArgument, "neighborhood graph must be connected");
  }
  if (source_ && source_->original_ids.size() != graph_.node_count()) {
    throw Error(ErrorCode::InvalidArgument, "neighborhood source id map has wrong length");
  }
}

NodeId Neighborhood::original_id(NodeId v) const {
  return source_ ? source_->original_ids.at(v) : v;
}

Neighborhood make_neighborhood(const Graph& g, std::span<const NodeId> nodes, NodeId anchor,
                               std::size_t graph_index) {
  auto sub = induced_subgraph(g, nodes);
  const auto it = std::lower_bound(sub.origin.begin(), sub.origin.end(), anchor);
  if (it == sub.origin.end() || *it != anchor) {
    throw Error(ErrorCode::UnknownNode, "anchor not in neighborhood node set");
  }
  const auto local_anchor = static_cast<NodeId>(it - sub.origin.begin());
  NeighborhoodSource source{g.name(), graph_index, std::move(sub.origin)};
  return Neighborhood(std::move(sub.graph), local_anchor, std::move(source));
}

Neighborhood sub_neighborhood(const Neighborhood& parent, std::span<const NodeId> nodes,
                              NodeId anchor) {
  auto sub = induced_subgraph(parent.graph(), nodes);
  const auto it = std::lower_bound(sub.origin.begin(), sub.origin.end(), anchor);
  if (it == sub.origin.end() || *it != anchor) {
    throw Error(ErrorCode::UnknownNode, "anchor not in neighborhood node set");
  }
  const auto local_anchor = static_cast<NodeId>(it - sub.origin.begin());
  std::optional<NeighborhoodSource> source;
  if (parent.source()) {
    NeighborhoodSource s{parent.source()->graph_name, parent.source()->graph_index, {}};
    s.original_ids.reserve(sub.origin.size());
    for (NodeId v : sub.origin) s.original_ids.push_back(parent.original_id(v));
    source = std::move(s);
  }
  return Neighborhood(std::move(sub.graph), local_anchor, std::move(source));
}

Neighborhood k_hop_neighborhood(const Graph& g, NodeId anchor, std::size_t k) {
  if (!g.contains(anchor)) {
    throw Error(ErrorCode::UnknownNode, "k_hop_neighborhood: unknown anchor " +
                                            std::to_string(anchor));
  }
  const auto dist = bfs_distances(g, anchor);
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (dist[v] <= k) nodes.push_back(v);
  }
  return make_neighborhood(g, nodes, anchor);
}

std::size_t anchor_eccentricity(const Neighborhood& n) {
  const auto dist = bfs_distances(n.graph(), n.anchor());
  return *std::max_element(dist.begin(), dist.end());
}

namespace {

std::string feature_token(const NodeFeatures& f, bool respect_features) {
  if (!respect_features) return "*";
  std::string token(to_string(f.type));
  token += '@';
  if (f.voltage_kv) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), *f.voltage_kv);
    token.append(buf, res.ptr);
  } else {
    token += '-';
  }
  return token;
}

}  // namespace

std::string canonical_key(const Graph& g, bool respect_features) {
  constexpr int kRounds = 3;
  const auto n = g.node_count();
  std::vector<std::uint64_t> color(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto token = feature_token(g.features(v), respect_features) + "#" +
                       std::to_string(g.degree(v));
    color[v] = detail::fnv1a64(token);
  }

  std::string key = "n" + std::to_string(n) + "m" + std::to_string(g.edge_count());
  auto append_histogram = [&] {
    auto sorted = color;
    std::sort(sorted.begin(), sorted.end());
    key += '|';
    for (auto c : sorted) key += detail::hex64(c);
  };
  append_histogram();

  std::vector<std::uint64_t> next(n);
  std::vector<std::uint64_t> around;
  for (int round = 0; round < kRounds; ++round) {
    for (NodeId v = 0; v < n; ++v) {
      around.clear();
      for (NodeId w : g.neighbors(v)) around.push_back(color[w]);
      std::sort(around.begin(), around.end());
      std::string sig = detail::hex64(color[v]) + ":";
      for (auto c : around) sig += detail::hex64(c);
      next[v] = detail::fnv1a64(sig);
    }
    color.swap(next);
  }
  append_histogram();
  return key;
}

}  // namespace gridmotif
