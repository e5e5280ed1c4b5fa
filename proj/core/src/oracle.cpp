#include "gridmotif/oracle.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "gridmotif/error.hpp"

namespace gridmotif {

std::string_view to_string(MatchMode mode) {
  return mode == MatchMode::Induced ? "induced" : "monomorphism";
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr NodeId kUnmapped = std::numeric_limits<NodeId>::max();

class Deadline {
 public:
  explicit Deadline(const OracleBudget& budget) {
    const auto now = Clock::now();
    const auto room = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::time_point::max() - now);
    end_ = budget.timeout >= room ? Clock::time_point::max() : now + budget.timeout;
  }

  bool expired() {
    if (expired_) return true;
    if (++ticks_ % 1024 == 0 && Clock::now() >= end_) expired_ = true;
    return expired_;
  }

 private:
  Clock::time_point end_{};
  std::uint64_t ticks_ = 0;
  bool expired_ = false;
};

// Backtracking matcher over query nodes in a fixed connectivity-first order.
// Candidate targets for a node come from the image of an already-matched
// neighbor, so each extension only scans one adjacency list.
class Matcher {
 public:
  using Visitor = std::function<bool(const std::vector<NodeId>&)>;

  Matcher(const Graph& target, const Graph& query, MatchMode mode, bool respect_features,
          Deadline& deadline)
      : target_(target),
        query_(query),
        mode_(mode),
        respect_features_(respect_features),
        deadline_(deadline),
        map_(query.node_count(), kUnmapped),
        used_(target.node_count(), false) {}

  void fix(NodeId q, NodeId t) { fixed_ = {q, t}; }

  // Returns false if the search stopped on the deadline.
  bool run(const Visitor& visit) {
    visit_ = &visit;
    build_order();
    stop_ = false;
    extend(0);
    return !timed_out_;
  }

 private:
  struct Step {
    NodeId node;
    NodeId parent = kUnmapped;
    std::vector<NodeId> linked;
    std::vector<NodeId> unlinked;
  };

  void build_order() {
    const auto n = query_.node_count();
    std::vector<bool> placed(n, false);
    std::vector<std::size_t> links(n, 0);
    order_.clear();
    for (std::size_t i = 0; i < n; ++i) {
      NodeId best = kUnmapped;
      if (i == 0 && fixed_) {
        best = fixed_->first;
      } else {
        for (NodeId v = 0; v < n; ++v) {
          if (placed[v]) continue;
          if (best == kUnmapped || links[v] > links[best] ||
              (links[v] == links[best] && query_.degree(v) > query_.degree(best))) {
            best = v;
          }
        }
      }
      placed[best] = true;
      Step step{best, kUnmapped, {}, {}};
      for (const auto& prev : order_) {
        if (query_.has_edge(best, prev.node)) {
          step.linked.push_back(prev.node);
          if (step.parent == kUnmapped) step.parent = prev.node;
        } else {
          step.unlinked.push_back(prev.node);
        }
      }
      for (NodeId w : query_.neighbors(best)) ++links[w];
      order_.push_back(std::move(step));
    }
  }

  bool feasible(const Step& step, NodeId t) const {
    if (used_[t]) return false;
    if (target_.degree(t) < query_.degree(step.node)) return false;
    if (respect_features_ && !(target_.features(t) == query_.features(step.node))) return false;
    for (NodeId q : step.linked) {
      if (!target_.has_edge(t, map_[q])) return false;
    }
    if (mode_ == MatchMode::Induced) {
      for (NodeId q : step.unlinked) {
        if (target_.has_edge(t, map_[q])) return false;
      }
    }
    return true;
  }

  void assign(const Step& step, NodeId t, std::size_t depth) {
    map_[step.node] = t;
    used_[t] = true;
    extend(depth + 1);
    used_[t] = false;
    map_[step.node] = kUnmapped;
  }

  void extend(std::size_t depth) {
    if (stop_) return;
    if (deadline_.expired()) {
      timed_out_ = true;
      stop_ = true;
      return;
    }
    if (depth == order_.size()) {
      if (!(*visit_)(map_)) stop_ = true;
      return;
    }
    const Step& step = order_[depth];
    if (depth == 0 && fixed_) {
      if (feasible(step, fixed_->second)) assign(step, fixed_->second, depth);
      return;
    }
    if (step.parent != kUnmapped) {
      for (NodeId t : target_.neighbors(map_[step.parent])) {
        if (stop_) return;
        if (feasible(step, t)) assign(step, t, depth);
      }
    } else {
      for (NodeId t = 0; t < target_.node_count(); ++t) {
        if (stop_) return;
        if (feasible(step, t)) assign(step, t, depth);
      }
    }
  }

  const Graph& target_;
  const Graph& query_;
  MatchMode mode_;
  bool respect_features_;
  Deadline& deadline_;
  std::optional<std::pair<NodeId, NodeId>> fixed_;
  std::vector<Step> order_;
  std::vector<NodeId> map_;
  std::vector<bool> used_;
  const Visitor* visit_ = nullptr;
  bool stop_ = false;
  bool timed_out_ = false;
};

std::vector<NodeId> image_key(const Graph& query, const std::vector<NodeId>& map, MatchMode mode) {
  std::vector<NodeId> key(map.begin(), map.end());
  std::sort(key.begin(), key.end());
  if (mode == MatchMode::Monomorphism) {
    // Node set followed by the image edge set, each edge as (min, max).
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : query.edges()) {
      const NodeId a = map[e.u];
      const NodeId b = map[e.v];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(edges.begin(), edges.end());
    for (auto [a, b] : edges) {
      key.push_back(a);
      key.push_back(b);
    }
  }
  return key;
}

CountResult count_images(const Graph& target, const Graph& query, const MatchSemantics& sem,
                         const OracleBudget& budget,
                         std::optional<std::pair<NodeId, NodeId>> anchor) {
  if (query.empty()) throw Error(ErrorCode::InvalidArgument, "query graph must be non-empty");
  if (query.node_count() > target.node_count()) return {0, true};
  Deadline deadline(budget);
  Matcher matcher(target, query, sem.mode, sem.respect_features, deadline);
  if (anchor) matcher.fix(anchor->first, anchor->second);
  std::set<std::vector<NodeId>> images;
  const bool complete = matcher.run([&](const std::vector<NodeId>& map) {
    images.insert(image_key(query, map, sem.mode));
    return true;
  });
  return {images.size(), complete};
}

}  // namespace

CountResult vf2_count(const Graph& target, const Graph& query, const MatchSemantics& sem,
                      const OracleBudget& budget) {
  return count_images(target, query, sem, budget, std::nullopt);
}

CountResult vf2_count(const Neighborhood& target, const Neighborhood& query,
                      const MatchSemantics& sem, const OracleBudget& budget) {
  std::optional<std::pair<NodeId, NodeId>> anchor;
  if (sem.anchored) anchor = std::pair{query.anchor(), target.anchor()};
  return count_images(target.graph(), query.graph(), sem, budget, anchor);
}

bool anchored_contains(const Neighborhood& target, const Neighborhood& query,
                       const MatchSemantics& sem, const OracleBudget& budget) {
  if (query.size() > target.size()) return false;
  if (query.graph().edge_count() > target.graph().edge_count() && sem.mode == MatchMode::Monomorphism)
    return false;
  Deadline deadline(budget);
  Matcher matcher(target.graph(), query.graph(), sem.mode, sem.respect_features, deadline);
  matcher.fix(query.anchor(), target.anchor());
  bool found = false;
  const bool complete = matcher.run([&](const std::vector<NodeId>&) {
    found = true;
    return false;
  });
  if (!found && !complete) {
    throw Error(ErrorCode::Timeout, "anchored_contains: budget exhausted before a decision");
  }
  return found;
}

bool is_isomorphic(const Graph& a, const Graph& b, bool respect_features) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  if (a.empty()) return true;
  auto degrees = [](const Graph& g) {
    std::vector<std::size_t> d(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) d[v] = g.degree(v);
    std::sort(d.begin(), d.end());
    return d;
  };
  if (degrees(a) != degrees(b)) return false;
  Deadline deadline(OracleBudget{std::chrono::milliseconds::max()});
  Matcher matcher(a, b, MatchMode::Induced, respect_features, deadline);
  bool found = false;
  matcher.run([&](const std::vector<NodeId>&) {
    found = true;
    return false;
  });
  return found;
}

std::uint64_t brute_force_count(const Graph& target, const Graph& query,
                                const MatchSemantics& sem) {
  constexpr std::size_t kMaxTarget = 10;
  if (target.node_count() > kMaxTarget) {
    throw Error(ErrorCode::TooLarge, "brute_force_count: target exceeds 10 nodes");
  }
  if (query.empty()) throw Error(ErrorCode::InvalidArgument, "query graph must be non-empty");
  const std::size_t n = target.node_count();
  const std::size_t k = query.node_count();
  if (k > n) return 0;

  auto node_ok = [&](NodeId q, NodeId t) {
    return !sem.respect_features || query.features(q) == target.features(t);
  };

  std::set<std::vector<NodeId>> images;
  std::uint64_t induced_hits = 0;
  // Walk every k-subset of target nodes via a selection mask.
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<NodeId> subset;
    for (NodeId v = 0; v < n; ++v) {
      if (mask[v]) subset.push_back(v);
    }
    std::vector<NodeId> perm = subset;
    bool subset_hit = false;
    do {
      // perm[q] is the image of query node q.
      bool ok = true;
      for (NodeId q = 0; q < k && ok; ++q) ok = node_ok(q, perm[q]);
      for (NodeId a = 0; a < k && ok; ++a) {
        for (NodeId b = a + 1; b < k && ok; ++b) {
          const bool qe = query.has_edge(a, b);
          const bool te = target.has_edge(perm[a], perm[b]);
          ok = sem.mode == MatchMode::Induced ? qe == te : (!qe || te);
        }
      }
      if (!ok) continue;
      if (sem.mode == MatchMode::Induced) {
        subset_hit = true;
        break;
      }
      std::vector<std::pair<NodeId, NodeId>> edges;
      for (NodeId a = 0; a < k; ++a) {
        for (NodeId b = a + 1; b < k; ++b) {
          if (query.has_edge(a, b)) {
            edges.emplace_back(std::min(perm[a], perm[b]), std::max(perm[a], perm[b]));
          }
        }
      }
      std::sort(edges.begin(), edges.end());
      std::vector<NodeId> key = subset;
      for (auto [a, b] : edges) {
        key.push_back(a);
        key.push_back(b);
      }
      images.insert(std::move(key));
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (subset_hit) ++induced_hits;
  } while (std::prev_permutation(mask.begin(), mask.end()));

  return sem.mode == MatchMode::Induced ? induced_hits : images.size();
}

CountResult exact_support(std::span<const Graph> graphs, const Neighborhood& query, std::size_t k,
                          const MatchSemantics& sem, const OracleBudget& budget) {
  if (k < anchor_eccentricity(query)) {
    throw Error(ErrorCode::InvalidArgument,
                "exact_support: k is smaller than the query anchor's eccentricity");
  }
  // With k at least the anchor eccentricity, every anchored occurrence lies in
  // the k-hop ball and induced edges there equal induced edges in the graph,
  // so matching on the whole graph with the anchor pinned is equivalent.
  const auto start = std::chrono::steady_clock::now();
  CountResult total;
  const NodeId qa = query.anchor();
  for (const auto& g : graphs) {
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (g.degree(v) < query.graph().degree(qa)) continue;
      if (sem.respect_features && !(g.features(v) == query.graph().features(qa))) continue;
      const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      if (elapsed >= budget.timeout) {
        total.complete = false;
        return total;
      }
      Deadline deadline(OracleBudget{budget.timeout - elapsed});
      Matcher matcher(g, query.graph(), sem.mode, sem.respect_features, deadline);
      matcher.fix(qa, v);
      bool found = false;
      const bool complete = matcher.run([&](const std::vector<NodeId>&) {
        found = true;
        return false;
      });
      if (found) {
        ++total.count;
      } else if (!complete) {
        total.complete = false;
        return total;
      }
    }
  }
  return total;
}

}  // namespace gridmotif
