#include "gridmotif/sampling.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "gridmotif/error.hpp"
#include "gridmotif/parallel.hpp"
#include "json_io.hpp"

namespace gridmotif {

namespace {

constexpr std::size_t kDrawRetries = 100;

// Nodes whose connected component has at least min_size nodes.
std::vector<NodeId> eligible_anchors(const Graph& g, std::size_t min_size) {
  const auto n = g.node_count();
  std::vector<std::size_t> component(n, n);
  std::vector<std::size_t> sizes;
  for (NodeId s = 0; s < n; ++s) {
    if (component[s] != n) continue;
    const auto id = sizes.size();
    std::size_t count = 0;
    std::deque<NodeId> queue{s};
    component[s] = id;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      ++count;
      for (NodeId w : g.neighbors(v)) {
        if (component[w] == n) {
          component[w] = id;
          queue.push_back(w);
        }
      }
    }
    sizes.push_back(count);
  }
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (sizes[component[v]] >= min_size) out.push_back(v);
  }
  return out;
}

// BFS from start visiting neighbors in shuffled order; stops at target nodes.
std::vector<NodeId> random_bfs(const Graph& g, NodeId start, std::size_t target, Rng& rng) {
  std::vector<NodeId> collected{start};
  std::unordered_set<NodeId> seen{start};
  std::deque<NodeId> queue{start};
  std::vector<NodeId> order;
  while (!queue.empty() && collected.size() < target) {
    const NodeId v = queue.front();
    queue.pop_front();
    const auto nbrs = g.neighbors(v);
    order.assign(nbrs.begin(), nbrs.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (NodeId w : order) {
      if (collected.size() >= target) break;
      if (seen.insert(w).second) {
        collected.push_back(w);
        queue.push_back(w);
      }
    }
  }
  return collected;
}

void check_range(SizeRange range) {
  if (range.min < 1 || range.min > range.max) {
    throw Error(ErrorCode::InvalidArgument, "size range must satisfy 1 <= min <= max");
  }
}

Neighborhood sample_from(const Graph& g, std::span<const NodeId> eligible, Rng& rng,
                         SizeRange range, std::size_t graph_index) {
  if (eligible.empty()) {
    throw Error(ErrorCode::TooSmall, "graph '" + g.name() + "' has no component with " +
                                         std::to_string(range.min) + " nodes");
  }
  const NodeId anchor = eligible[uniform_index(rng, eligible.size())];
  const auto target = static_cast<std::size_t>(
      uniform_int(rng, static_cast<int>(range.min), static_cast<int>(range.max)));
  const auto nodes = random_bfs(g, anchor, target, rng);
  return make_neighborhood(g, nodes, anchor, graph_index);
}

MatchSemantics label_semantics(const PairOptions& options) {
  MatchSemantics sem = options.semantics;
  sem.anchored = true;
  return sem;
}

Neighborhood shrink(const Neighborhood& target, Rng& rng, const PairOptions& options) {
  SizeRange range = options.shrink.value_or(SizeRange{1, target.size()});
  range.max = std::min(range.max, target.size());
  range.min = std::clamp<std::size_t>(range.min, 1, range.max);
  const auto size = static_cast<std::size_t>(
      uniform_int(rng, static_cast<int>(range.min), static_cast<int>(range.max)));
  const auto nodes = random_bfs(target.graph(), target.anchor(), size, rng);
  return sub_neighborhood(target, nodes, target.anchor());
}

// Adds 1-3 absent edges, or rewires one edge, keeping the graph connected.
std::optional<Neighborhood> perturb(const Neighborhood& query, Rng& rng) {
  const Graph& g = query.graph();
  const auto n = g.node_count();
  std::vector<EdgePair> absent;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (!g.has_edge(a, b)) absent.emplace_back(a, b);
    }
  }
  if (absent.empty()) return std::nullopt;
  std::vector<EdgePair> edges;
  for (const auto& e : g.edges()) edges.emplace_back(e.u, e.v);
  std::shuffle(absent.begin(), absent.end(), rng);

  const bool rewire = uniform_real(rng) < 0.5 && !edges.empty();
  if (rewire) {
    edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, edges.size())));
    edges.push_back(absent.front());
  } else {
    const auto add = std::min<std::size_t>(static_cast<std::size_t>(uniform_int(rng, 1, 3)),
                                           absent.size());
    edges.insert(edges.end(), absent.begin(), absent.begin() + static_cast<std::ptrdiff_t>(add));
  }
  Graph perturbed = Graph::build(g.name(), g.all_features(), edges);
  if (!is_connected(perturbed)) return std::nullopt;
  return Neighborhood(std::move(perturbed), query.anchor());
}

}  // namespace

Neighborhood sample_neighborhood(const Graph& g, Rng& rng, SizeRange range,
                                 std::size_t graph_index) {
  check_range(range);
  const auto eligible = eligible_anchors(g, range.min);
  return sample_from(g, eligible, rng, range, graph_index);
}

std::vector<Neighborhood> decompose(const GraphCorpus& corpus, std::size_t count, SizeRange range,
                                    std::uint64_t seed) {
  check_range(range);
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "decompose: count must be >= 1");
  std::vector<std::vector<NodeId>> eligible(corpus.graphs.size());
  parallel_for(corpus.graphs.size(),
               [&](std::size_t i) { eligible[i] = eligible_anchors(corpus.graphs[i], range.min); });
  if (std::all_of(eligible.begin(), eligible.end(), [](const auto& e) { return e.empty(); })) {
    throw Error(ErrorCode::TooSmall, "no corpus graph has a component with " +
                                         std::to_string(range.min) + " nodes");
  }

  std::vector<std::optional<Neighborhood>> out(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng = make_stream(seed, {0x6465636fULL, i});
    for (std::size_t attempt = 0; attempt < kDrawRetries; ++attempt) {
      const auto gi = weighted_index(rng, corpus.size_weights);
      if (eligible[gi].empty()) continue;
      out[i] = sample_from(corpus.graphs[gi], eligible[gi], rng, range, gi);
      return;
    }
    throw Error(ErrorCode::TooSmall, "decompose: draw " + std::to_string(i) +
                                         " found no large-enough graph after retries");
  });
  std::vector<Neighborhood> result;
  result.reserve(count);
  for (auto& n : out) result.push_back(std::move(*n));
  return result;
}

TrainingPair make_positive_pair(const Neighborhood& target, Rng& rng, const PairOptions& options) {
  Neighborhood query = shrink(target, rng, options);
  if (!anchored_contains(target, query, label_semantics(options))) {
    throw Error(ErrorCode::InvalidArgument, "positive pair failed oracle verification");
  }
  return TrainingPair{std::move(query), target, true};
}

TrainingPair make_negative_pair(std::span<const Neighborhood> pool, Rng& rng,
                                const PairOptions& options) {
  if (pool.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "make_negative_pair: need at least 2 neighborhoods");
  }
  const auto sem = label_semantics(options);
  for (std::size_t attempt = 0; attempt < options.retry_cap; ++attempt) {
    const bool hard = uniform_real(rng) < 0.5;
    if (!hard) {
      const auto& target = pool[uniform_index(rng, pool.size())];
      const auto& donor = pool[uniform_index(rng, pool.size())];
      Neighborhood query = shrink(donor, rng, options);
      if (!anchored_contains(target, query, sem)) {
        return TrainingPair{std::move(query), target, false};
      }
    } else {
      const auto& target = pool[uniform_index(rng, pool.size())];
      Neighborhood base = shrink(target, rng, options);
      auto query = perturb(base, rng);
      if (query && !anchored_contains(target, *query, sem)) {
        return TrainingPair{std::move(*query), target, false};
      }
    }
  }
  throw Error(ErrorCode::RetryExhausted, "make_negative_pair: no negative found in " +
                                             std::to_string(options.retry_cap) + " draws");
}

Dataset build_dataset(std::span<const Neighborhood> pool, std::size_t n_pairs, std::uint64_t seed,
                      const PairOptions& options) {
  if (n_pairs < 2) throw Error(ErrorCode::InvalidArgument, "build_dataset: n_pairs must be >= 2");
  if (pool.empty()) throw Error(ErrorCode::InvalidArgument, "build_dataset: empty pool");

  std::vector<std::optional<TrainingPair>> pairs(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    Rng rng = make_stream(seed, {0x70616972ULL, i});
    if (i % 2 == 0) {
      pairs[i] = make_positive_pair(pool[uniform_index(rng, pool.size())], rng, options);
    } else {
      pairs[i] = make_negative_pair(pool, rng, options);
    }
  });

  Dataset ds;
  ds.seed = seed;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    ds.pairs.push_back(std::move(*pairs[i]));
    (ds.pairs.back().label ? pos : neg).push_back(i);
  }
  ds.positives = pos.size();
  ds.negatives = neg.size();

  Rng split_rng = make_stream(seed, {0x73706c74ULL});
  for (auto* group : {&pos, &neg}) {
    std::shuffle(group->begin(), group->end(), split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::llround(options.validation_fraction * static_cast<double>(group->size())));
    ds.validation.insert(ds.validation.end(), group->begin(),
                         group->begin() + static_cast<std::ptrdiff_t>(n_val));
    ds.train.insert(ds.train.end(), group->begin() + static_cast<std::ptrdiff_t>(n_val),
                    group->end());
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.validation.begin(), ds.validation.end());
  return ds;
}

Dataset build_dataset(const GraphCorpus& corpus, std::size_t n_pairs, SizeRange range,
                      std::uint64_t seed, const PairOptions& options) {
  const auto pool = decompose(corpus, n_pairs, range, seed);
  return build_dataset(pool, n_pairs, seed, options);
}

std::string dataset_to_jsonl(const Dataset& dataset) {
  std::vector<char> in_validation(dataset.pairs.size(), 0);
  for (auto i : dataset.validation) in_validation[i] = 1;
  std::string out;
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    const auto& p = dataset.pairs[i];
    detail::Json j;
    j["index"] = i;
    j["seed"] = dataset.seed;
    j["split"] = in_validation[i] ? "validation" : "train";
    j["label"] = p.label ? 1 : 0;
    j["query"] = detail::neighborhood_to_json(p.query);
    j["target"] = detail::neighborhood_to_json(p.target);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Dataset dataset_from_jsonl(std::string_view text) {
  Dataset ds;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string path = "line " + std::to_string(line_no);
    detail::Json j;
    try {
      j = detail::Json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
    }
    if (!j.contains("label") || !j["label"].is_number_integer()) {
      throw Error(ErrorCode::SchemaError, path + ".label: expected 0 or 1");
    }
    TrainingPair pair{detail::neighborhood_from_json(j.at("query"), path + ".query"),
                      detail::neighborhood_from_json(j.at("target"), path + ".target"),
                      j["label"].get<int>() != 0};
    const auto index = ds.pairs.size();
    (pair.label ? ds.positives : ds.negatives) += 1;
    ds.pairs.push_back(std::move(pair));
    ds.seed = j.value("seed", std::uint64_t{0});
    if (j.value("split", std::string("train")) == "validation") {
      ds.validation.push_back(index);
    } else {
      ds.train.push_back(index);
    }
  }
  return ds;
}

std::string neighborhoods_to_jsonl(std::span<const Neighborhood> neighborhoods) {
  std::string out;
  for (const auto& n : neighborhoods) {
    out += detail::neighborhood_to_json(n).dump();
    out += '\n';
  }
  return out;
}

std::vector<Neighborhood> neighborhoods_from_jsonl(std::string_view text) {
  std::vector<Neighborhood> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string path = "line " + std::to_string(line_no);
    try {
      out.push_back(detail::neighborhood_from_json(detail::Json::parse(line), path));
    } catch (const detail::Json::exception& e) {
      throw Error(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
    }
  }
  return out;
}

}  // namespace gridmotif
