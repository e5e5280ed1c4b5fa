#include "doctest.h"
#include "graphs.hpp"
#include "gridmotif/error.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/synthetic.hpp"

using namespace gridmotif;
using namespace gridmotif::testing;

namespace {

const MatchSemantics kInduced{MatchMode::Induced, false, true};
const MatchSemantics kMono{MatchMode::Monomorphism, false, true};

Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

}  // namespace

TEST_SUITE("exact_oracle") {

TEST_CASE("vf2_count examples") {
  CHECK(vf2_count(complete_graph(4), triangle(), kInduced).count == 4);
  CHECK(vf2_count(triangle(), path_graph(3), kInduced).count == 0);
  CHECK(vf2_count(star_graph(3), path_graph(3), kInduced).count == 3);
  CHECK(vf2_count(triangle(), path_graph(2), kInduced).count == 2 + 1);
  CHECK(vf2_count(triangle(), path_graph(3), kMono).count == 3);
  CHECK(vf2_count(complete_graph(4), path_graph(2), kMono).count == 6);
  // Monomorphic 4-cycles in K4: three distinct edge sets.
  CHECK(vf2_count(complete_graph(4), cycle_graph(4), kMono).count == 3);
  CHECK(vf2_count(complete_graph(4), cycle_graph(4), kInduced).count == 0);
  CHECK(vf2_count(path_graph(2), path_graph(4), kInduced).count == 0);
}

TEST_CASE("vf2_count respects features") {
  const auto target = make_graph(3, {{0, 1}, {1, 2}},
                                 {feat(NodeType::PQ), feat(NodeType::PV), feat(NodeType::PQ)});
  const auto query = make_graph(2, {{0, 1}}, {feat(NodeType::PV), feat(NodeType::PQ)});
  CHECK(vf2_count(target, query, kInduced).count == 2);
  const auto pq_edge = make_graph(2, {{0, 1}}, {feat(NodeType::PQ), feat(NodeType::PQ)});
  CHECK(vf2_count(target, pq_edge, kInduced).count == 0);
  CHECK(vf2_count(target, pq_edge, {MatchMode::Induced, false, false}).count == 2);
}

TEST_CASE("a graph occurs exactly once in itself") {
  Rng rng = make_stream(2, {});
  for (int i = 0; i < 20; ++i) {
    const auto g = assign_grid_features(grid_with_chords(2, 4, 2, rng), rng);
    CHECK(vf2_count(g, g, kInduced).count == 1);
  }
  // Automorphisms do not inflate: K4 has 24 of them.
  CHECK(vf2_count(complete_graph(4), complete_graph(4), kInduced).count == 1);
}

TEST_CASE("counts are invariant under relabeling") {
  Rng rng = make_stream(3, {});
  for (int i = 0; i < 30; ++i) {
    const auto t = assign_grid_features(random_tree(9, rng), rng);
    const auto q = make_graph(3, {{0, 1}, {1, 2}});
    for (auto sem : {kInduced, kMono}) {
      sem.respect_features = false;
      const auto base = vf2_count(t, q, sem).count;
      CHECK(vf2_count(permuted(t, random_permutation(9, rng)), q, sem).count == base);
      CHECK(vf2_count(t, permuted(q, random_permutation(3, rng)), sem).count == base);
    }
  }
}

TEST_CASE("anchored_contains") {
  const auto tri = Neighborhood(triangle(), 0);
  const auto single = anchored(1, {}, 0);
  CHECK(anchored_contains(tri, single));
  CHECK(anchored_contains(tri, tri));
  Rng rng = make_stream(5, {});
  for (int i = 0; i < 20; ++i) {
    const auto tree = Neighborhood(random_tree(8, rng), static_cast<NodeId>(uniform_index(rng, 8)));
    CHECK_FALSE(anchored_contains(tree, tri));
    CHECK(anchored_contains(tree, tree));
  }
  // Path 0-1-2 anchored at an end is not contained with the anchor on the center.
  const auto end = anchored(3, {{0, 1}, {1, 2}}, 0);
  const auto center = anchored(3, {{0, 1}, {1, 2}}, 1);
  CHECK_FALSE(anchored_contains(center, end));
  CHECK(anchored_contains(end, end));
  SUBCASE("anchored containment implies an occurrence") {
    for (int i = 0; i < 40; ++i) {
      const auto t = Neighborhood(random_tree(7, rng), 0);
      const auto q = anchored(3, {{0, 1}, {1, 2}}, static_cast<NodeId>(uniform_index(rng, 3)));
      if (anchored_contains(t, q, {MatchMode::Induced, true, false})) {
        CHECK(vf2_count(t.graph(), q.graph(), {MatchMode::Induced, false, false}).count >= 1);
      }
    }
  }
}

TEST_CASE("brute force examples") {
  CHECK(brute_force_count(path_graph(2), triangle()) == 0);
  MatchSemantics loose{MatchMode::Induced, false, false};
  const auto target = assign_grid_features(path_graph(6), *std::make_unique<Rng>(make_stream(1, {})));
  CHECK(brute_force_count(target, make_graph(1, {}), loose) == 6);
  CHECK(brute_force_count(complete_graph(4), triangle()) == 4);
  try {
    brute_force_count(path_graph(11), path_graph(2));
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("vf2 agrees with brute force on random feature-labeled instances") {
  Rng rng = make_stream(11, {});
  for (int i = 0; i < 300; ++i) {
    const auto n = 2 + uniform_index(rng, 7);
    auto t = grid_with_chords(1, n, uniform_index(rng, 4), rng);
    // Sparse random features so matches stay plentiful.
    std::vector<NodeFeatures> f(n);
    for (auto& x : f) x.type = uniform_real(rng) < 0.3 ? NodeType::PV : NodeType::PQ;
    std::vector<EdgePair> edges;
    for (const auto& e : t.edges()) edges.emplace_back(e.u, e.v);
    t = Graph::build("t", f, edges);
    const auto qn = 1 + uniform_index(rng, std::min<std::size_t>(4, n));
    const NodeId start[] = {0};
    (void)start;
    std::vector<NodeId> nodes(qn);
    std::iota(nodes.begin(), nodes.end(), static_cast<NodeId>(uniform_index(rng, n - qn + 1)));
    const auto q = induced_subgraph(t, nodes).graph;
    for (auto sem : {kInduced, kMono}) {
      CHECK(vf2_count(t, q, sem).count == brute_force_count(t, q, sem));
    }
  }
}

TEST_CASE("timeouts are reported, not truncated silently") {
  OracleBudget tiny{std::chrono::milliseconds(0)};
  const auto big = complete_graph(14);
  const auto r = vf2_count(big, complete_graph(7), {MatchMode::Monomorphism, false, false}, tiny);
  CHECK_FALSE(r.complete);
  const auto nb = Neighborhood(complete_graph(14), 0);
  const auto q = Neighborhood(cycle_graph(12), 0);
  try {
    anchored_contains(nb, Neighborhood(path_graph(14).renamed("p"), 0),
                      {MatchMode::Induced, true, false}, tiny);
    // Deciding quickly is allowed; an undecided search must throw.
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Timeout);
  }
  (void)q;
}

TEST_CASE("exact_support") {
  const std::vector<Graph> corpus{path_graph(3)};
  const auto single = anchored(1, {}, 0);
  MatchSemantics loose{MatchMode::Induced, true, false};
  CHECK(exact_support(corpus, single, 0, loose).count == 3);
  const auto edge = anchored(2, {{0, 1}}, 0);
  CHECK(exact_support(corpus, edge, 1, loose).count == 3);
  const std::vector<Graph> two{path_graph(3), triangle()};
  CHECK(exact_support(two, single, 0, loose).count == 6);
  const auto pv = anchored(1, {}, 0, {feat(NodeType::PV)});
  CHECK(exact_support(corpus, pv, 0, {MatchMode::Induced, true, true}).count == 0);
  // Radius below the query's anchor eccentricity is rejected.
  const auto path_end = anchored(3, {{0, 1}, {1, 2}}, 0);
  CHECK_THROWS_AS(exact_support(corpus, path_end, 1, loose), Error);
  CHECK(exact_support(corpus, path_end, 2, loose).count == 2);
}

}  // TEST_SUITE
