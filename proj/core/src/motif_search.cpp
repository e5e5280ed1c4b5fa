#include "gridmotif/motif_search.hpp"

#include <algorithm>
#include <set>

#include "gridmotif/error.hpp"
#include "gridmotif/parallel.hpp"
#include "gridmotif/rng.hpp"
#include "json_io.hpp"

namespace gridmotif {

std::vector<Neighborhood> grow_step(const Graph& target, const Neighborhood& current,
                                    std::size_t graph_index) {
  std::vector<NodeId> nodes;
  nodes.reserve(current.size() + 1);
  for (NodeId v = 0; v < current.size(); ++v) {
    const NodeId id = current.original_id(v);
    if (!target.contains(id)) {
      throw Error(ErrorCode::UnknownNode, "grow_step: node " + std::to_string(id) +
                                              " is not in the target graph");
    }
    nodes.push_back(id);
  }
  std::sort(nodes.begin(), nodes.end());
  std::set<NodeId> frontier;
  for (NodeId v : nodes) {
    for (NodeId u : target.neighbors(v)) {
      if (!std::binary_search(nodes.begin(), nodes.end(), u)) frontier.insert(u);
    }
  }
  const NodeId anchor = current.original_id(current.anchor());
  std::vector<Neighborhood> out;
  out.reserve(frontier.size());
  for (NodeId f : frontier) {
    auto grown = nodes;
    grown.insert(std::upper_bound(grown.begin(), grown.end(), f), f);
    out.push_back(make_neighborhood(target, grown, anchor, graph_index));
  }
  return out;
}

GrowthPath run_trial(const GraphCorpus& corpus, const RefStore& store, const EncoderParams& params,
                     std::size_t target_size, std::uint64_t seed, std::size_t trial,
                     bool respect_features) {
  if (target_size == 0) throw Error(ErrorCode::InvalidArgument, "target size must be >= 1");
  if (corpus.graphs.empty() || corpus.total_nodes() == 0) {
    throw Error(ErrorCode::EmptyGraph, "motif growth needs a non-empty corpus");
  }
  Rng rng = make_stream(seed, {0x67726f77ULL, trial});
  GrowthPath path;
  path.trial = trial;
  path.graph_index = weighted_index(rng, corpus.size_weights);
  const Graph& g = corpus.graphs[path.graph_index];
  path.seed_node = static_cast<NodeId>(uniform_index(rng, g.node_count()));

  const NodeId seed_node[] = {path.seed_node};
  auto current = make_neighborhood(g, seed_node, path.seed_node, path.graph_index);
  auto z = encode(params, current);
  auto est = estimate_frequency(store, z);
  path.steps.push_back(GrowthStep{std::move(current), std::move(z), est});

  while (path.steps.size() < target_size) {
    auto candidates = grow_step(g, path.steps.back().neighborhood, path.graph_index);
    if (candidates.empty()) break;
    std::vector<Embedding> embeddings;
    std::vector<std::size_t> estimates;
    embeddings.reserve(candidates.size());
    for (const auto& c : candidates) {
      embeddings.push_back(encode(params, c));
      estimates.push_back(estimate_frequency(store, embeddings.back()));
    }
    const auto best_est = *std::max_element(estimates.begin(), estimates.end());
    // Candidates come in ascending frontier id, so the first tied candidate
    // with the lowest key wins both tie-breaks.
    std::size_t best = candidates.size();
    std::string best_key;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (estimates[i] != best_est) continue;
      auto key = canonical_key(candidates[i].graph(), respect_features);
      if (best == candidates.size() || key < best_key) {
        best = i;
        best_key = std::move(key);
      }
    }
    path.steps.push_back(
        GrowthStep{std::move(candidates[best]), std::move(embeddings[best]), estimates[best]});
  }
  return path;
}

MiningResult mine_motifs(const GraphCorpus& corpus, const RefStore& store,
                         const EncoderParams& params, const MineOptions& options) {
  if (options.trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  if (options.sizes.empty()) throw Error(ErrorCode::InvalidArgument, "no motif sizes requested");
  for (auto s : options.sizes) {
    if (s == 0) throw Error(ErrorCode::InvalidArgument, "motif sizes must be >= 1");
  }
  check_compatible(store, params);
  const auto max_size = *std::max_element(options.sizes.begin(), options.sizes.end());

  MiningResult result;
  result.trials = options.trials;
  result.seed = options.seed;
  result.store_fingerprint = store.fingerprint;
  result.paths.resize(options.trials);
  parallel_for(options.trials, [&](std::size_t t) {
    result.paths[t] = run_trial(corpus, store, params, max_size, options.seed, t,
                                options.respect_features);
  });

  const std::set<std::size_t> sizes(options.sizes.begin(), options.sizes.end());
  for (auto k : sizes) {
    std::vector<MotifResult> classes;
    std::multimap<std::string, std::size_t> by_key;
    for (const auto& path : result.paths) {
      if (path.steps.size() < k) continue;
      const auto& nb = path.steps[k - 1].neighborhood;
      auto key = canonical_key(nb.graph(), options.respect_features);
      std::size_t found = classes.size();
      auto [lo, hi] = by_key.equal_range(key);
      for (auto it = lo; it != hi; ++it) {
        if (is_isomorphic(classes[it->second].motif, nb.graph(), options.respect_features)) {
          found = it->second;
          break;
        }
      }
      if (found == classes.size()) {
        MotifResult m{nb.graph(), nb, key, 0, 0, {}, std::nullopt, 0};
        by_key.emplace(std::move(key), classes.size());
        classes.push_back(std::move(m));
      }
      classes[found].support_trials += 1;
      classes[found].trials.push_back(path.trial);
    }
    parallel_for(classes.size(), [&](std::size_t i) {
      classes[i].estimated_frequency =
          estimate_frequency(store, encode(params, classes[i].representative));
    });
    std::stable_sort(classes.begin(), classes.end(), [](const MotifResult& a, const MotifResult& b) {
      if (a.estimated_frequency != b.estimated_frequency) {
        return a.estimated_frequency > b.estimated_frequency;
      }
      if (a.support_trials != b.support_trials) return a.support_trials > b.support_trials;
      return a.canonical_key < b.canonical_key;
    });
    for (std::size_t i = 0; i < classes.size(); ++i) classes[i].rank = i + 1;
    result.motifs.emplace(k, std::move(classes));
  }
  return result;
}

double monotone_step_fraction(const std::vector<GrowthPath>& paths) {
  std::size_t steps = 0;
  std::size_t monotone = 0;
  for (const auto& p : paths) {
    for (std::size_t i = 1; i < p.steps.size(); ++i) {
      ++steps;
      monotone += p.steps[i].estimate <= p.steps[i - 1].estimate;
    }
  }
  return steps == 0 ? 1.0 : static_cast<double>(monotone) / static_cast<double>(steps);
}

std::string mining_to_json(const MiningResult& result, std::size_t top_k) {
  detail::Json j;
  j["trials"] = result.trials;
  j["seed"] = result.seed;
  j["store_fingerprint"] = result.store_fingerprint;
  j["sizes"] = detail::Json::object();
  for (const auto& [k, list] : result.motifs) {
    auto arr = detail::Json::array();
    const auto n = top_k == 0 ? list.size() : std::min(top_k, list.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& m = list[i];
      detail::Json e;
      e["rank"] = m.rank;
      e["node_count"] = m.motif.node_count();
      e["edge_count"] = m.motif.edge_count();
      e["estimated_frequency"] = m.estimated_frequency;
      e["support_trials"] = m.support_trials;
      e["canonical_key"] = m.canonical_key;
      if (m.exact_count) {
        e["exact_count"] = {{"count", m.exact_count->count}, {"complete", m.exact_count->complete}};
      } else {
        e["exact_count"] = nullptr;
      }
      e["trials"] = m.trials;
      e["representative"] = detail::neighborhood_to_json(m.representative);
      arr.push_back(std::move(e));
    }
    j["sizes"][std::to_string(k)] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

MiningResult mining_from_json(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("motif file: ") + e.what());
  }
  MiningResult r;
  try {
    r.trials = j.at("trials").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.store_fingerprint = j.at("store_fingerprint").get<std::string>();
    for (const auto& [key, arr] : j.at("sizes").items()) {
      const auto k = static_cast<std::size_t>(std::stoul(key));
      std::vector<MotifResult> list;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& e = arr[i];
        const auto path = "$.sizes." + key + "[" + std::to_string(i) + "]";
        auto rep = detail::neighborhood_from_json(e.at("representative"), path + ".representative");
        MotifResult m{rep.graph(), rep, e.at("canonical_key").get<std::string>(), 0, 0, {},
                      std::nullopt, 0};
        m.estimated_frequency = e.at("estimated_frequency").get<std::size_t>();
        m.support_trials = e.at("support_trials").get<std::size_t>();
        m.trials = e.at("trials").get<std::vector<std::size_t>>();
        m.rank = e.at("rank").get<std::size_t>();
        if (!e.at("exact_count").is_null()) {
          m.exact_count = CountResult{e["exact_count"].at("count").get<std::uint64_t>(),
                                      e["exact_count"].at("complete").get<bool>()};
        }
        list.push_back(std::move(m));
      }
      r.motifs.emplace(k, std::move(list));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("motif file: ") + e.what());
  }
  return r;
}

}  // namespace gridmotif
