// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "config.hpp"
#include "gradcheck.hpp"
#include "graphs.hpp"
#include "gridmotif/embed_store.hpp"
#include "gridmotif/encoder.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/motif_search.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/parallel.hpp"
#include "gridmotif/report.hpp"
#include "gridmotif/sampling.hpp"
#include "gridmotif/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gridmotif;
using namespace gridmotif::testing;
using cli::Json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> check;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "gridmotif_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

// ---------------------------------------------------------------------------
// 1. Gradients against central differences of an independent forward pass.

Outcome gradient_correctness() {
  constexpr std::size_t kBatches = 10;
  Rng rng = make_stream(2024, {});
  std::size_t accepted = 0, redrawn = 0, checked = 0, zeros = 0;
  double worst = 0.0;
  for (std::uint64_t draw = 0; accepted < kBatches && draw < 1000; ++draw) {
    const auto params = EncoderParams::initialize(FeatureSpec{{13.8, 69.0, 138.0}}, {4, 4, 3}, 500 + draw);
    std::vector<Neighborhood> graphs;
    for (int i = 0; i < 8; ++i) graphs.push_back(random_small_neighborhood(rng, 6));
    std::vector<PairRef> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({&graphs[2 * i], &graphs[2 * i + 1], i % 2 == 0});
    const auto r = check_gradient(params, batch, 0.5, 1e-4);
    if (r.kink_crossings > 0) {
      ++redrawn;
      continue;
    }
    ++accepted;
    checked += r.checked;
    zeros += r.zero_at_roundoff;
    worst = std::max(worst, r.max_relative_error);
  }
  return {accepted == kBatches && worst < 1e-4,
          fmt::format("max relative error {:.2e} over {} batches, {} parameters checked "
                      "({} with zero gradient, difference within roundoff; {} draws redrawn for "
                      "kink crossings)",
                      worst, accepted, checked, zeros, redrawn)};
}

// ---------------------------------------------------------------------------
// 2. Loss is zero exactly when positives have zero energy and negatives reach
// the margin. Energies are built from dyadic coordinates so they are exact.

Outcome loss_characterization() {
  struct Kind {
    double gap;  // z_u = [gap, 0.25], z_v = [0, 0.5]: energy gap^2
    bool label;
  };
  std::size_t cases = 0, wrong = 0;
  for (const double alpha : {0.25, 1.0}) {
    const double r = std::sqrt(alpha);  // 0.5 or 1: exact
    const std::vector<Kind> kinds{
        {0.0, true},            {0.0, false},          {std::ldexp(1.0, -12), true},
        {r / 2.0, true},        {r / 2.0, false},      {r, false},
        {r + 0.25, false},      {r + 0.25, true},      {r - std::ldexp(1.0, -12), false},
    };
    const auto make = [](const Kind& k) {
      ScoredPair p;
      p.z_u.values = Vector{{k.gap, 0.25}};
      p.z_v.values = Vector{{0.0, 0.5}};
      p.label = k.label;
      return p;
    };
    // Every sequence of 1 to 3 pair kinds.
    std::vector<std::vector<std::size_t>> grid;
    for (std::size_t a = 0; a < kinds.size(); ++a) {
      grid.push_back({a});
      for (std::size_t b = 0; b < kinds.size(); ++b) {
        grid.push_back({a, b});
        for (std::size_t c = 0; c < kinds.size(); ++c) grid.push_back({a, b, c});
      }
    }
    for (const auto& seq : grid) {
      std::vector<ScoredPair> batch;
      bool expect_zero = true;
      double expected = 0.0;
      for (auto i : seq) {
        batch.push_back(make(kinds[i]));
        const double e = kinds[i].gap * kinds[i].gap;
        if (kinds[i].label) {
          expect_zero = expect_zero && e == 0.0;
          expected += e;
        } else {
          expect_zero = expect_zero && e >= alpha;
          expected += std::max(0.0, alpha - e);
        }
      }
      const double loss = pair_loss(batch, alpha);
      ++cases;
      if ((loss == 0.0) != expect_zero || loss < 0.0 || std::abs(loss - expected) > 1e-15) ++wrong;
    }
  }
  return {wrong == 0, fmt::format("{} designed batches, {} violations", cases, wrong)};
}

// ---------------------------------------------------------------------------
// 3. vf2_count equals brute force over every graph up to 7 nodes.

Outcome oracle_equivalence() {
  std::vector<Graph> targets, queries;
  for (std::size_t n = 1; n <= 7; ++n) {
    for (auto& g : all_graphs(n)) targets.push_back(std::move(g));
  }
  for (std::size_t n = 1; n <= 4; ++n) {
    for (auto& g : all_graphs(n)) {
      if (connected(g)) queries.push_back(std::move(g));
    }
  }
  std::vector<std::size_t> mismatches(targets.size(), 0);
  std::size_t comparisons = 0;
  parallel_for(targets.size(), [&](std::size_t t) {
    for (const auto& q : queries) {
      for (const auto mode : {MatchMode::Induced, MatchMode::Monomorphism}) {
        const MatchSemantics sem{mode, false, false};
        const auto fast = vf2_count(targets[t], q, sem);
        if (!fast.complete || fast.count != brute_force_count(targets[t], q, sem)) ++mismatches[t];
      }
    }
  });
  comparisons = targets.size() * queries.size() * 2;
  std::size_t bad = 0;
  for (auto m : mismatches) bad += m;
  return {bad == 0 && targets.size() == 1252 && queries.size() == 10,
          fmt::format("{} targets x {} connected queries x 2 semantics = {} comparisons, {} mismatches",
                      targets.size(), queries.size(), comparisons, bad)};
}

// ---------------------------------------------------------------------------
// 4. Dominated queries never get a lower estimate.

Outcome estimator_dominance() {
  constexpr std::size_t kPairs = 10000;
  Rng rng = make_stream(404, {});
  std::size_t violations = 0;
  for (std::size_t i = 0; i < kPairs; ++i) {
    const auto dim = 1 + uniform_index(rng, 8);
    const auto size = uniform_index(rng, 120);
    RefStore store;
    store.threshold = std::ldexp(uniform_real(rng) + 0.01, -uniform_int(rng, 0, 4));
    auto draw = [&] {
      Embedding e;
      e.values.resize(static_cast<Eigen::Index>(dim));
      for (auto& x : e.values) x = uniform_real(rng) < 0.2 ? 0.0 : uniform_real(rng);
      return e;
    };
    for (std::size_t r = 0; r < size; ++r) store.vectors.push_back(draw());
    const auto z_v = draw();
    Embedding z_u = z_v;
    for (auto& x : z_u.values) {
      const double u = uniform_real(rng);
      x = u < 0.3 ? x : x * u;
    }
    if (estimate_frequency(store, z_u) < estimate_frequency(store, z_v)) ++violations;
  }
  return {violations == 0, fmt::format("{} dominated pairs on random stores, {} violations", kPairs, violations)};
}

// ---------------------------------------------------------------------------
// Shared trained encoder for criteria 5, 8 and 9.

struct TrainedSetup {
  GraphCorpus corpus;
  std::vector<Neighborhood> pool;
  TrainResult result;
  double seconds = 0.0;
};

constexpr std::size_t kTrainEpochs = 50;
constexpr double kLearningRate = 3e-3;

const TrainedSetup& trained() {
  static const TrainedSetup setup = [] {
    const auto start = std::chrono::steady_clock::now();
    TrainedSetup s;
    s.corpus = synthetic_corpus({.families = {SyntheticFamily::Tree, SyntheticFamily::Grid,
                                              SyntheticFamily::Star},
                                 .graph_count = 200},
                                7);
    s.pool = decompose(s.corpus, 2000, {3, 15}, 11);
    const auto dataset = build_dataset(s.pool, 4000, 13);
    const auto init = EncoderParams::initialize(FeatureSpec{s.corpus.voltage_buckets}, {}, 1);
    TrainConfig cfg;
    cfg.epochs = kTrainEpochs;
    cfg.learning_rate = kLearningRate;
    s.result = train(dataset, init, cfg);
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
  }();
  return setup;
}

// 5. Held-out pairs come from a fresh decomposition of the same corpus.
Outcome training_quality() {
  const auto& s = trained();
  const auto held_pool = decompose(s.corpus, 2000, {3, 15}, 21);
  const auto held = build_dataset(held_pool, 1000, 23);
  const auto n = held.pairs.size();
  std::vector<double> energies;
  const auto labels = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = held.pairs[i];
    energies.push_back(energy(encode(s.result.params, p.query), encode(s.result.params, p.target)));
    labels[i] = p.label;
  }
  const double acc = pair_accuracy(energies, {labels.get(), n}, s.result.threshold);
  return {acc >= 0.85 && s.seconds < 1800.0,
          fmt::format("held-out accuracy {:.4f} on {} pairs at t={:.4g} (validation {:.4f}, best "
                      "epoch {}/{}, {} graphs, training {:.0f} s)",
                      acc, held.pairs.size(), s.result.threshold, s.result.best_accuracy,
                      s.result.best_epoch, kTrainEpochs, s.corpus.graphs.size(), s.seconds)};
}

const RefStore& trained_store() {
  static const RefStore store = [] {
    const auto& s = trained();
    return build_reference_store(s.result.params, s.pool, s.result.threshold);
  }();
  return store;
}

// 8. Growth paths with the trained encoder.
Outcome growth_monotonicity() {
  const auto& s = trained();
  const auto mined = mine_motifs(s.corpus, trained_store(), s.result.params,
                                 {.sizes = {3, 4, 5, 6, 7, 8, 9, 10}, .trials = 1000, .seed = 3});
  std::size_t steps = 0;
  for (const auto& p : mined.paths) steps += p.steps.size() - 1;
  const double frac = monotone_step_fraction(mined.paths);
  return {frac >= 0.9 && mined.paths.size() == 1000,
          fmt::format("{:.4f} of {} growth steps non-increasing over {} trials", frac, steps,
                      mined.paths.size())};
}

// 9. Norm against node count over the reference store.
Outcome norm_trend() {
  const auto tables = report_norm_tables(trained_store());
  const double rho = tables.spearman_nodes.value_or(-2.0);
  return {rho >= 0.8, fmt::format("spearman(node_count, norm) = {:.4f} over {} references", rho,
                                  tables.rows.size())};
}

// ---------------------------------------------------------------------------
// 6. End-to-end mining through the CLI on feature-free corpora.

std::optional<std::vector<Graph>> mined_size3(const std::string& family, std::uint64_t seed) {
  const auto dir = work_dir() / fmt::format("mining_{}_{}", family, seed);
  const auto config = dir / "config.json";
  fs::create_directories(dir);
  const Json cfg{
      {"corpus", {{"synthetic", {{"families", {family}}, {"graph_count", 30}, {"min_nodes", 15},
                                 {"max_nodes", 30}, {"features", false}, {"seed", seed}}}}},
      {"sampling", {{"seed", seed}, {"count", 1000}, {"min_nodes", 3}, {"max_nodes", 10}, {"pairs", 1600}}},
      {"encoder", {{"hidden", 32}, {"embed", 32}, {"layers", 4}, {"epochs", 40}, {"learning_rate", 3e-3}}},
      {"mining", {{"sizes", {3}}, {"trials", 200}}},
      {"validation", {{"respect_features", false}}},
      {"report", {{"pca_sample", 200}}}};
  write_text_file(config, cfg.dump(2));
  if (run_cli({"pipeline", "--config", config.string(), "--out", (dir / "out").string()}) != 0) {
    return std::nullopt;
  }
  const auto mined = mining_from_json(read_text_file(dir / "out" / "motifs.json"));
  std::vector<Graph> ranked;
  for (const auto& m : mined.motifs.at(3)) ranked.push_back(m.motif);
  return ranked;
}

Outcome mining_sanity() {
  const auto triangle = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  const auto path = path_graph(3);
  std::size_t tree_hits = 0, triangle_hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto trees = mined_size3("tree", seed);
    if (trees && !trees->empty() && is_isomorphic(trees->front(), path, false)) ++tree_hits;
    const auto rich = mined_size3("triangle", seed);
    if (rich) {
      for (std::size_t i = 0; i < std::min<std::size_t>(2, rich->size()); ++i) {
        if (is_isomorphic((*rich)[i], triangle, false)) {
          ++triangle_hits;
          break;
        }
      }
    }
  }
  return {tree_hits == 10 && triangle_hits >= 8,
          fmt::format("tree corpora: 3-path ranked first in {}/10 seeds; triangle-rich corpora: "
                      "triangle in top-2 in {}/10 seeds",
                      tree_hits, triangle_hits)};
}

// ---------------------------------------------------------------------------
// 7. Estimator ranking against exact support on small corpora. References
// span 3-25 nodes so they usually cover the k-hop balls exact support counts.

Outcome ranking_agreement() {
  std::size_t cells = 0, matches = 0, largest = 0;
  std::vector<double> taus;
  const std::vector<std::vector<SyntheticFamily>> mixes{
      {SyntheticFamily::Tree, SyntheticFamily::Grid},
      {SyntheticFamily::Grid, SyntheticFamily::Triangle},
      {SyntheticFamily::Tree, SyntheticFamily::Star},
      {SyntheticFamily::Star, SyntheticFamily::Grid, SyntheticFamily::Triangle},
      {SyntheticFamily::Tree, SyntheticFamily::Grid, SyntheticFamily::Star}};
  for (std::size_t c = 0; c < mixes.size(); ++c) {
    const std::uint64_t seed = 100 + c;
    const auto corpus = synthetic_corpus(
        {.families = mixes[c], .graph_count = 20, .graph_size = {12, 24}, .features = false}, seed);
    largest = std::max(largest, corpus.total_nodes());
    const auto pool = decompose(corpus, 1000, {3, 25}, seed);
    const auto dataset = build_dataset(pool, 2000, seed);
    const auto init = EncoderParams::initialize(FeatureSpec{}, {32, 32, 4}, seed);
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.learning_rate = 3e-3;
    cfg.sample_neighbors = false;
    cfg.seed = seed;
    const auto trained = train(dataset, init, cfg);
    const auto store = build_reference_store(trained.params, pool, trained.threshold);
    const auto mined = mine_motifs(corpus, store, trained.params,
                                   {.sizes = {3, 4, 5}, .trials = 300, .seed = seed, .respect_features = false});
    const auto report = report_validation(mined, corpus, {.top_k = 3, .budget = {}, .respect_features = false});
    for (const auto& s : report.sizes) {
      ++cells;
      matches += s.top1_match ? 1 : 0;
      if (s.kendall_tau) taus.push_back(*s.kendall_tau);
    }
  }
  std::sort(taus.begin(), taus.end());
  double median = -2.0;
  if (!taus.empty()) {
    const auto m = taus.size() / 2;
    median = taus.size() % 2 ? taus[m] : 0.5 * (taus[m - 1] + taus[m]);
  }
  const double rate = cells ? static_cast<double>(matches) / static_cast<double>(cells) : 0.0;
  return {rate >= 0.7 && median >= 0.5 && largest <= 500,
          fmt::format("top-1 agreement {}/{} cells ({:.2f}); median Kendall tau {:.3f} over {} "
                      "defined cells; largest corpus {} nodes",
                      matches, cells, rate, median, taus.size(), largest)};
}

// ---------------------------------------------------------------------------
// 10. Every stage's artifacts are byte-identical across runs and thread counts.

Outcome determinism() {
  const auto dir = work_dir() / "determinism";
  fs::create_directories(dir);
  const Json cfg{
      {"corpus", {{"synthetic", {{"families", {"tree", "grid", "star"}}, {"graph_count", 40},
                                 {"min_nodes", 15}, {"max_nodes", 30}}}}},
      {"sampling", {{"seed", 77}, {"count", 500}, {"min_nodes", 3}, {"max_nodes", 12}, {"pairs", 600}}},
      {"encoder", {{"hidden", 16}, {"embed", 16}, {"layers", 4}, {"epochs", 3}}},
      {"mining", {{"sizes", {3, 4, 5}}, {"trials", 100}}},
      {"validation", {{"timeout_ms", 20000}}},
      {"report", {{"pca_sample", 200}}}};
  write_text_file(dir / "config.json", cfg.dump(2));
  const std::vector<std::pair<std::string, std::string>> runs{{"a", "1"}, {"b", "1"}, {"c", "4"}};
  for (const auto& [name, threads] : runs) {
    if (run_cli({"pipeline", "--config", (dir / "config.json").string(), "--out",
                 (dir / name).string(), "--threads", threads}) != 0) {
      return {false, "pipeline run " + name + " failed"};
    }
  }
  std::size_t files = 0;
  std::vector<std::string> differing;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    const auto base = read_text_file(entry.path());
    ++files;
    for (const char* other : {"b", "c"}) {
      if (!fs::exists(dir / other / name) || read_text_file(dir / other / name) != base) {
        differing.push_back(name.string() + "@" + other);
      }
    }
  }
  std::string list;
  for (const auto& d : differing) list += " " + d;
  return {differing.empty() && files >= 12,
          fmt::format("{} artifacts compared across 2 single-threaded runs and a 4-thread run; "
                      "{} differ{}",
                      files, differing.size(), list)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "loss characterization", loss_characterization},
      {3, "oracle equivalence", oracle_equivalence},
      {4, "estimator dominance anti-monotonicity", estimator_dominance},
      {5, "training quality", training_quality},
      {6, "end-to-end mining sanity", mining_sanity},
      {7, "ranking agreement", ranking_agreement},
      {8, "growth-path monotonicity", growth_monotonicity},
      {9, "norm-size trend", norm_trend},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::cout << fmt::format("{} criterion {} ({}): {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", c.id,
                             c.name, o.detail, secs)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
