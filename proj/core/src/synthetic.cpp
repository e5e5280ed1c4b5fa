#include "gridmotif/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridmotif/error.hpp"

namespace gridmotif {

namespace {

Graph plain(std::string name, std::size_t n, const std::vector<EdgePair>& edges) {
  return Graph::build(std::move(name), std::vector<NodeFeatures>(n), edges);
}

}  // namespace

Graph random_tree(std::size_t n, Rng& rng, std::string name) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "random_tree: n must be >= 1");
  std::vector<EdgePair> edges;
  for (NodeId v = 1; v < n; ++v) edges.emplace_back(static_cast<NodeId>(uniform_index(rng, v)), v);
  return plain(std::move(name), n, edges);
}

Graph grid_with_chords(std::size_t rows, std::size_t cols, std::size_t chords, Rng& rng,
                       std::string name) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "grid: empty dimensions");
  const std::size_t n = rows * cols;
  std::set<EdgePair> edges;
  auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace(id(r, c), id(r + 1, c));
    }
  }
  const std::size_t max_edges = n * (n - 1) / 2;
  for (std::size_t added = 0; added < chords && edges.size() < max_edges;) {
    auto a = static_cast<NodeId>(uniform_index(rng, n));
    auto b = static_cast<NodeId>(uniform_index(rng, n));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (edges.emplace(a, b).second) ++added;
  }
  return plain(std::move(name), n, {edges.begin(), edges.end()});
}

Graph star_hierarchy(std::size_t depth, std::size_t max_branching, Rng& rng, std::string name) {
  if (max_branching < 2) throw Error(ErrorCode::InvalidArgument, "star_hierarchy: branching < 2");
  std::vector<EdgePair> edges;
  std::vector<NodeId> level{0};
  NodeId next = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<NodeId> children;
    for (NodeId parent : level) {
      const auto k = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<int>(max_branching)));
      for (std::size_t i = 0; i < k; ++i) {
        edges.emplace_back(parent, next);
        children.push_back(next++);
      }
    }
    level = std::move(children);
  }
  return plain(std::move(name), next, edges);
}

Graph triangle_rich(std::size_t core_nodes, std::size_t fringe, Rng& rng, std::string name) {
  if (core_nodes < 3) throw Error(ErrorCode::InvalidArgument, "triangle_rich: core < 3 nodes");
  std::vector<EdgePair> edges{{0, 1}, {1, 2}, {0, 2}};
  for (NodeId v = 3; v < core_nodes; ++v) {
    const auto e = edges[uniform_index(rng, edges.size())];
    edges.emplace_back(e.first, v);
    edges.emplace_back(e.second, v);
  }
  const std::size_t n = core_nodes + fringe;
  for (auto v = static_cast<NodeId>(core_nodes); v < n; ++v) {
    edges.emplace_back(static_cast<NodeId>(uniform_index(rng, v)), v);
  }
  return plain(std::move(name), n, edges);
}

Graph path_graph(std::size_t n, std::string name) {
  std::vector<EdgePair> edges;
  for (NodeId v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
  return plain(std::move(name), n, edges);
}

Graph cycle_graph(std::size_t n, std::string name) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "cycle_graph: n < 3");
  std::vector<EdgePair> edges;
  for (NodeId v = 0; v < n; ++v) edges.emplace_back(v, static_cast<NodeId>((v + 1) % n));
  return plain(std::move(name), n, edges);
}

Graph complete_graph(std::size_t n, std::string name) {
  std::vector<EdgePair> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  }
  return plain(std::move(name), n, edges);
}

Graph star_graph(std::size_t leaves, std::string name) {
  std::vector<EdgePair> edges;
  for (NodeId v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
  return plain(std::move(name), leaves + 1, edges);
}

Graph assign_grid_features(const Graph& g, Rng& rng) {
  static constexpr double kLevels[] = {13.8, 69.0, 138.0, 230.0};
  const std::size_t n = g.node_count();
  std::vector<NodeFeatures> features(n);
  if (n == 0) return g;
  const std::size_t base = uniform_index(rng, std::size(kLevels));
  std::size_t second = uniform_index(rng, std::size(kLevels) - 1);
  if (second >= base) ++second;
  const auto ref = static_cast<NodeId>(uniform_index(rng, n));
  for (NodeId v = 0; v < n; ++v) {
    auto& f = features[v];
    if (v == ref) {
      f.type = NodeType::REF;
    } else {
      f.type = uniform_real(rng) < 0.2 ? NodeType::PV : NodeType::PQ;
    }
    f.voltage_kv = uniform_real(rng) < 0.1 ? kLevels[second] : kLevels[base];
  }
  std::vector<EdgePair> edges;
  for (const auto& e : g.edges()) edges.emplace_back(e.u, e.v);
  return Graph::build(g.name(), std::move(features), edges);
}

GraphCorpus synthetic_corpus(const SyntheticCorpusOptions& options, std::uint64_t seed) {
  if (options.families.empty() || options.graph_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "synthetic corpus needs families and graph_count >= 1");
  }
  const auto lo = std::max<std::size_t>(options.graph_size.min, 4);
  const auto hi = std::max(lo, options.graph_size.max);
  std::vector<Graph> graphs;
  graphs.reserve(options.graph_count);
  for (std::size_t i = 0; i < options.graph_count; ++i) {
    Rng rng = make_stream(seed, {0x73796e74ULL, i});
    const auto family = options.families[i % options.families.size()];
    const auto target = lo + uniform_index(rng, hi - lo + 1);
    const auto tag = std::to_string(i);
    Graph g;
    switch (family) {
      case SyntheticFamily::Tree:
        g = random_tree(target, rng, "tree_" + tag);
        break;
      case SyntheticFamily::Grid: {
        const auto rows = std::max<std::size_t>(2, static_cast<std::size_t>(std::sqrt(target)));
        const auto cols = std::max<std::size_t>(2, target / rows);
        g = grid_with_chords(rows, cols, 1 + uniform_index(rng, std::max<std::size_t>(1, target / 10)),
                             rng, "grid_" + tag);
        break;
      }
      case SyntheticFamily::Star: {
        // Depth 2 or 3 with branching sized so the hierarchy lands near target.
        const std::size_t depth = 2 + uniform_index(rng, 2);
        const auto branching = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::pow(static_cast<double>(target), 1.0 / static_cast<double>(depth)) * 1.3));
        g = star_hierarchy(depth, branching, rng, "star_" + tag);
        break;
      }
      case SyntheticFamily::Triangle: {
        const auto core = std::max<std::size_t>(3, target * 2 / 3);
        g = triangle_rich(core, target - std::min(target, core), rng, "triangles_" + tag);
        break;
      }
    }
    graphs.push_back(options.features ? assign_grid_features(g, rng) : std::move(g));
  }
  return make_corpus(std::move(graphs), options.bucket_width_kv);
}

}  // namespace gridmotif
