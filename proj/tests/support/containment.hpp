#pragma once

#include <vector>

#include "gridmotif/graph.hpp"

namespace gridmotif::testing {

/// Plain backtracking over injective maps of query nodes (in id order) into
/// the target with the anchor pinned. Checks every assigned pair directly;
/// no candidate ordering or look-ahead.
class NaiveContainment {
 public:
  NaiveContainment(const Neighborhood& target, const Neighborhood& query, bool induced,
                   bool respect_features)
      : t_(target), q_(query), induced_(induced), features_(respect_features) {}

  bool contains() {
    const auto nq = q_.size();
    if (nq > t_.size()) return false;
    map_.assign(nq, 0);
    used_.assign(t_.size(), false);
    return extend(0);
  }

 private:
  bool compatible(NodeId qv, NodeId tv) const {
    if (features_ && q_.graph().features(qv) != t_.graph().features(tv)) return false;
    for (NodeId prev = 0; prev < qv; ++prev) {
      const bool qe = q_.graph().has_edge(qv, prev);
      const bool te = t_.graph().has_edge(tv, map_[prev]);
      if (qe && !te) return false;
      if (induced_ && te && !qe) return false;
    }
    return true;
  }

  bool extend(NodeId qv) {
    if (qv == q_.size()) return true;
    for (NodeId tv = 0; tv < t_.size(); ++tv) {
      if (used_[tv]) continue;
      if ((qv == q_.anchor()) != (tv == t_.anchor())) continue;
      if (!compatible(qv, tv)) continue;
      used_[tv] = true;
      map_[qv] = tv;
      if (extend(qv + 1)) return true;
      used_[tv] = false;
    }
    return false;
  }

  const Neighborhood& t_;
  const Neighborhood& q_;
  bool induced_;
  bool features_;
  std::vector<NodeId> map_;
  std::vector<bool> used_;
};

inline bool naive_anchored_contains(const Neighborhood& target, const Neighborhood& query,
                                    bool induced = true, bool respect_features = true) {
  return NaiveContainment(target, query, induced, respect_features).contains();
}

}  // namespace gridmotif::testing
