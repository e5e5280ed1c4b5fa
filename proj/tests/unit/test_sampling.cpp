#include <cmath>
#include <map>
#include <set>

#include "containment.hpp"
#include "doctest.h"
#include "expect.hpp"
#include "graphs.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/parallel.hpp"
#include "gridmotif/sampling.hpp"
#include "gridmotif/synthetic.hpp"

using namespace gridmotif;
using namespace gridmotif::testing;

namespace {

Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

bool contains_anchor_and_connected(const Neighborhood& n) {
  return n.anchor() < n.size() && connected(n.graph());
}

GraphCorpus small_corpus(std::uint64_t seed) {
  return synthetic_corpus({.graph_count = 30, .graph_size = {10, 30}}, seed);
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("sample_neighborhood examples") {
  Rng rng = make_stream(1, {});
  for (int i = 0; i < 10; ++i) {
    const auto n = sample_neighborhood(triangle(), rng, {3, 3});
    CHECK(n.size() == 3);
    CHECK(n.graph().edge_count() == 3);
  }
  const auto single = sample_neighborhood(make_graph(1, {}), rng, {1, 1});
  CHECK(single.size() == 1);
  CHECK(error_code([&] { sample_neighborhood(path_graph(2), rng, {3, 5}); }) == ErrorCode::TooSmall);
  CHECK(error_code([&] { sample_neighborhood(path_graph(2), rng, {3, 1}); }) ==
        ErrorCode::InvalidArgument);

  const auto g = assign_grid_features(grid_with_chords(6, 6, 8, rng), rng);
  Rng a = make_stream(5, {}), b = make_stream(5, {});
  CHECK(sample_neighborhood(g, a, {3, 12}) == sample_neighborhood(g, b, {3, 12}));
}

TEST_CASE("sampled neighborhoods are connected, anchored and induced") {
  Rng rng = make_stream(2, {});
  // Two components: anchors in the small one cannot reach 5 nodes.
  const auto g = make_graph(8, {{0, 1}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}});
  for (int i = 0; i < 200; ++i) {
    const auto n = sample_neighborhood(g, rng, {5, 6});
    CHECK(n.size() >= 5);
    CHECK(n.size() <= 6);
    CHECK(contains_anchor_and_connected(n));
    CHECK(n.original_id(n.anchor()) >= 2);
    for (NodeId u = 0; u < n.size(); ++u) {
      for (NodeId v = u + 1; v < n.size(); ++v) {
        CHECK(n.graph().has_edge(u, v) == g.has_edge(n.original_id(u), n.original_id(v)));
      }
    }
  }
}

TEST_CASE("decompose") {
  const auto corpus = small_corpus(4);
  const auto many = decompose(corpus, 10000, {3, 25}, 7);
  CHECK(many.size() == 10000);
  std::set<std::size_t> sizes;
  for (const auto& n : many) {
    CHECK(n.size() >= 3);
    CHECK(n.size() <= 25);
    CHECK(n.source().has_value());
    CHECK(contains_anchor_and_connected(n));
    sizes.insert(n.size());
  }
  // 30-node graphs can fill the upper bins too.
  CHECK(sizes.size() >= 20);
  CHECK(decompose(corpus, 1, {3, 5}, 1).size() == 1);
  CHECK(error_code([&] { decompose(corpus, 0, {3, 5}, 1); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { decompose(make_corpus({path_graph(2)}), 3, {3, 5}, 1); }) ==
        ErrorCode::TooSmall);
}

TEST_CASE("decompose picks graphs in proportion to size") {
  const auto corpus = make_corpus({path_graph(10).renamed("a"), path_graph(30).renamed("b")});
  constexpr std::size_t kDraws = 10000;
  const auto draws = decompose(corpus, kDraws, {3, 5}, 13);
  std::size_t from_a = 0;
  for (const auto& n : draws) from_a += n.source()->graph_index == 0 ? 1 : 0;
  // Binomial(10000, 0.25): mean 2500, sd sqrt(1875).
  CHECK(std::abs(static_cast<double>(from_a) - 2500.0) <= 3.0 * std::sqrt(1875.0));
}

TEST_CASE("decompose is independent of thread count") {
  const auto corpus = small_corpus(6);
  const auto one = with_threads(1, [&] { return decompose(corpus, 300, {3, 12}, 3); });
  const auto four = with_threads(4, [&] { return decompose(corpus, 300, {3, 12}, 3); });
  CHECK(neighborhoods_to_jsonl(one) == neighborhoods_to_jsonl(four));
}

TEST_CASE("positive pair examples") {
  Rng rng = make_stream(3, {});
  const Neighborhood tri(triangle(), 0);
  const auto edge = make_positive_pair(tri, rng, {.shrink = SizeRange{2, 2}});
  CHECK(edge.label);
  CHECK(edge.query.size() == 2);
  CHECK(edge.query.graph().edge_count() == 1);
  CHECK(edge.query.original_id(edge.query.anchor()) == 0);
  const auto same = make_positive_pair(tri, rng, {.shrink = SizeRange{3, 3}});
  CHECK(is_isomorphic(same.query.graph(), tri.graph()));
  CHECK(same.label);
}

TEST_CASE("negative pair examples") {
  const Neighborhood tri(triangle(), 0);
  const Neighborhood path(path_graph(3), 0);
  CHECK_FALSE(anchored_contains(path, tri));
  CHECK(anchored_contains(tri, tri));
  Rng rng = make_stream(4, {});
  // Only identical triangles: every random candidate is contained, so only
  // strategy (b) could succeed, and a triangle cannot be perturbed.
  const std::vector<Neighborhood> same{tri, tri};
  CHECK(error_code([&] { make_negative_pair(same, rng, {.shrink = SizeRange{3, 3}}); }) ==
        ErrorCode::RetryExhausted);
  const std::vector<Neighborhood> one{tri};
  CHECK(error_code([&] { make_negative_pair(one, rng); }) == ErrorCode::InvalidArgument);
  const std::vector<Neighborhood> mixed{tri, path};
  for (int i = 0; i < 20; ++i) {
    const auto neg = make_negative_pair(mixed, rng);
    CHECK_FALSE(neg.label);
    CHECK_FALSE(naive_anchored_contains(neg.target, neg.query));
  }
}

TEST_CASE("generated labels agree with an independent containment check") {
  const auto corpus = small_corpus(8);
  const auto pool = decompose(corpus, 400, {3, 9}, 21);
  Rng rng = make_stream(9, {});
  std::size_t checked_pos = 0, checked_neg = 0;
  for (int i = 0; i < 500; ++i) {
    const auto pos = make_positive_pair(pool[uniform_index(rng, pool.size())], rng);
    CHECK(naive_anchored_contains(pos.target, pos.query));
    ++checked_pos;
    const auto neg = make_negative_pair(pool, rng);
    CHECK_FALSE(naive_anchored_contains(neg.target, neg.query));
    ++checked_neg;
    CHECK(contains_anchor_and_connected(pos.query));
    CHECK(contains_anchor_and_connected(neg.query));
  }
  CHECK(checked_pos == 500);
  CHECK(checked_neg == 500);
}

TEST_CASE("build_dataset balance, split and determinism") {
  const auto corpus = small_corpus(10);
  const auto ds = build_dataset(corpus, 1000, {3, 12}, 17);
  REQUIRE(ds.pairs.size() == 1000);
  CHECK(ds.positives + ds.negatives == 1000);
  CHECK(std::abs(static_cast<double>(ds.positives) - 500.0) <= 25.0);

  std::vector<int> seen(ds.pairs.size(), 0);
  for (auto i : ds.train) ++seen[i];
  for (auto i : ds.validation) ++seen[i];
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  CHECK(ds.validation.size() == 100);
  std::size_t val_pos = 0;
  for (auto i : ds.validation) val_pos += ds.pairs[i].label ? 1 : 0;
  CHECK(val_pos == 50);

  const auto again = with_threads(3, [&] { return build_dataset(corpus, 1000, {3, 12}, 17); });
  CHECK(dataset_to_jsonl(again) == dataset_to_jsonl(ds));
  CHECK(dataset_to_jsonl(build_dataset(corpus, 1000, {3, 12}, 18)) != dataset_to_jsonl(ds));

  // 5% audit against the independent check, restricted to the smaller pairs
  // where naive backtracking stays cheap.
  Rng audit = make_stream(31, {});
  std::size_t audited = 0;
  while (audited < 50) {
    const auto& p = ds.pairs[uniform_index(audit, ds.pairs.size())];
    CHECK(naive_anchored_contains(p.target, p.query) == p.label);
    ++audited;
  }
  CHECK(error_code([&] { build_dataset(corpus, 1, {3, 5}, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("dataset and neighborhood JSONL round trip") {
  const auto corpus = small_corpus(12);
  const auto ds = build_dataset(corpus, 60, {3, 8}, 5);
  const auto back = dataset_from_jsonl(dataset_to_jsonl(ds));
  REQUIRE(back.pairs.size() == ds.pairs.size());
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    CHECK(back.pairs[i].query == ds.pairs[i].query);
    CHECK(back.pairs[i].target == ds.pairs[i].target);
    CHECK(back.pairs[i].label == ds.pairs[i].label);
  }
  CHECK(back.train == ds.train);
  CHECK(back.validation == ds.validation);
  CHECK(back.positives == ds.positives);

  const auto pool = decompose(corpus, 50, {3, 8}, 2);
  CHECK(neighborhoods_from_jsonl(neighborhoods_to_jsonl(pool)) == pool);
  CHECK(error_code([] { dataset_from_jsonl("{\"query\": 1}\n"); }) == ErrorCode::SchemaError);
  CHECK(error_code([] { neighborhoods_from_jsonl("nope\n"); }) == ErrorCode::SchemaError);
}

}  // TEST_SUITE
