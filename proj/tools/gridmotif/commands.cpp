#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "gridmotif/embed_store.hpp"
#include "gridmotif/encoder.hpp"
#include "gridmotif/error.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/motif_search.hpp"
#include "gridmotif/oracle.hpp"
#include "gridmotif/parallel.hpp"
#include "gridmotif/report.hpp"
#include "gridmotif/sampling.hpp"
#include "gridmotif/synthetic.hpp"

namespace gridmotif::cli {

namespace fs = std::filesystem;

namespace {

// Artifact names inside the output directory.
constexpr const char* kCorpusFile = "corpus.json";
constexpr const char* kNeighborhoodFile = "neighborhoods.jsonl";
constexpr const char* kDatasetFile = "dataset.jsonl";
constexpr const char* kCheckpointFile = "encoder.ckpt";
constexpr const char* kModelFile = "model.json";
constexpr const char* kTrainLogFile = "train_log.csv";
constexpr const char* kStoreFile = "store.bin";
constexpr const char* kReferencesFile = "references.csv";
constexpr const char* kPcaFile = "pca.csv";
constexpr const char* kMotifsFile = "motifs.json";
constexpr const char* kValidationFile = "validation.csv";
constexpr const char* kSummaryFile = "summary.json";

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("gridmotif");
    l->set_pattern("[%l] %v");
    l->set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GRIDMOTIF_LOG")) {
      l->set_level(spdlog::level::from_str(env));
    }
    return l;
  }();
  return log;
}

struct Settings {
  std::string command;
  fs::path out_dir;
  unsigned threads = 0;

  std::vector<fs::path> corpus_paths;
  double bucket_width = 1.0;
  std::optional<SyntheticCorpusOptions> synthetic;
  std::uint64_t synthetic_seed = 0;

  std::uint64_t seed = 0;
  std::size_t count = 10000;
  SizeRange range{3, 25};
  std::size_t pairs = 4000;
  double validation_fraction = 0.1;

  EncoderDims dims;
  TrainConfig train;
  std::optional<double> threshold;

  MineOptions mine;
  ValidationOptions validation;
  std::size_t pca_sample = 1000;

  fs::path count_target;
  fs::path count_query;
  MatchSemantics count_semantics;
};

const std::map<std::string, SyntheticFamily>& family_names() {
  static const std::map<std::string, SyntheticFamily> names{
      {"tree", SyntheticFamily::Tree},
      {"grid", SyntheticFamily::Grid},
      {"star", SyntheticFamily::Star},
      {"triangle", SyntheticFamily::Triangle}};
  return names;
}

bool needs_seed(const std::string& command) { return command != "count" && command != "ingest"; }

bool needs_corpus(const std::string& command) {
  return command != "count" && command != "train" && command != "embed" && command != "report";
}

Settings read_settings(const RunConfig& config, const std::string& command) {
  ConfigReader r(config);
  Settings s;
  s.command = command;
  s.threads = static_cast<unsigned>(r.size("threads", 0));
  const auto out = r.text("out", std::string());
  if (out.empty() && command != "count") {
    r.fail("out", "output directory is required (--out)");
  }
  s.out_dir = out;

  if (needs_seed(command)) {
    s.seed = r.u64("sampling.seed");
  } else {
    s.seed = r.u64("sampling.seed", 0);
  }

  for (const auto& p : r.strings("corpus.paths", {})) s.corpus_paths.emplace_back(p);
  s.bucket_width = r.real("corpus.bucket_width_kv", 1.0);
  if (!(s.bucket_width > 0.0)) r.fail("corpus.bucket_width_kv", "must be positive");
  if (config.has("corpus.synthetic")) {
    SyntheticCorpusOptions o;
    o.families.clear();
    for (const auto& name : r.strings("corpus.synthetic.families", {"tree", "grid", "star"})) {
      const auto it = family_names().find(name);
      if (it == family_names().end()) {
        r.fail("corpus.synthetic.families", "unknown family '" + name + "'");
      } else {
        o.families.push_back(it->second);
      }
    }
    o.graph_count = r.size("corpus.synthetic.graph_count", 200);
    o.graph_size.min = r.size("corpus.synthetic.min_nodes", 20);
    o.graph_size.max = r.size("corpus.synthetic.max_nodes", 60);
    o.features = r.flag("corpus.synthetic.features", true);
    o.bucket_width_kv = s.bucket_width;
    s.synthetic = o;
    s.synthetic_seed = r.u64("corpus.synthetic.seed", s.seed);
  }
  if (needs_corpus(command)) {
    if (s.corpus_paths.empty() && !s.synthetic) {
      r.fail("corpus.paths", "give corpus files or a corpus.synthetic section");
    }
    for (std::size_t i = 0; i < s.corpus_paths.size(); ++i) {
      if (!fs::exists(s.corpus_paths[i])) {
        r.fail("corpus.paths[" + std::to_string(i) + "]",
               "file not found: " + s.corpus_paths[i].string());
      }
    }
  }

  s.count = r.size("sampling.count", 10000);
  s.range.min = r.size("sampling.min_nodes", 3);
  s.range.max = r.size("sampling.max_nodes", 25);
  if (s.range.min < 1 || s.range.min > s.range.max) {
    r.fail("sampling.min_nodes", "need 1 <= min_nodes <= max_nodes");
  }
  s.pairs = r.size("sampling.pairs", 4000);
  s.validation_fraction = r.real("sampling.validation_fraction", 0.1);

  s.dims.hidden = r.size("encoder.hidden", 64);
  s.dims.embed = r.size("encoder.embed", 64);
  s.dims.layers = r.size("encoder.layers", 8);
  s.train.alpha = r.real("encoder.alpha", 0.5);
  if (!(s.train.alpha > 0.0)) r.fail("encoder.alpha", "must be positive");
  s.train.learning_rate = r.real("encoder.learning_rate", 1e-3);
  s.train.batch_size = r.size("encoder.batch_size", 64);
  s.train.epochs = r.size("encoder.epochs", 50);
  s.train.neighbor_samples = r.size("encoder.neighbor_samples", 8);
  if (s.train.neighbor_samples < 1) r.fail("encoder.neighbor_samples", "must be >= 1");
  s.train.sample_neighbors = r.flag("encoder.sample_neighbors", true);
  s.train.seed = r.u64("encoder.seed", s.seed);
  const auto reduction = r.text("encoder.reduction", "mean");
  if (reduction == "mean") {
    s.train.reduction = Reduction::Mean;
  } else if (reduction == "sum") {
    s.train.reduction = Reduction::Sum;
  } else {
    r.fail("encoder.reduction", "expected \"mean\" or \"sum\"");
  }
  if (config.has("encoder.threshold")) {
    s.threshold = r.real("encoder.threshold");
    if (!(*s.threshold > 0.0)) r.fail("encoder.threshold", "must be positive");
  }

  s.mine.sizes = r.sizes("mining.sizes", {3, 4, 5, 6, 7, 8, 9, 10});
  for (auto k : s.mine.sizes) {
    if (k < 1 || k > 30) r.fail("mining.sizes", "sizes must lie in [1, 30]");
  }
  s.mine.trials = r.size("mining.trials", 1000);
  if (s.mine.trials < 1) r.fail("mining.trials", "must be >= 1");
  s.mine.seed = r.u64("mining.seed", s.seed);
  s.mine.respect_features = r.flag("validation.respect_features", true);

  s.validation.top_k = r.size("validation.top_k", 3);
  s.validation.budget.timeout = std::chrono::milliseconds(r.size("validation.timeout_ms", 60000));
  s.validation.respect_features = s.mine.respect_features;
  s.pca_sample = r.size("report.pca_sample", 1000);

  if (command == "count") {
    s.count_target = r.text("count.target");
    s.count_query = r.text("count.query");
    for (const auto* key : {"count.target", "count.query"}) {
      const auto* j = config.find(key);
      if (j && j->is_string() && !fs::exists(j->get<std::string>())) {
        r.fail(key, "file not found: " + j->get<std::string>());
      }
    }
    const auto mode = r.text("count.mode", "induced");
    if (mode == "induced") {
      s.count_semantics.mode = MatchMode::Induced;
    } else if (mode == "monomorphism") {
      s.count_semantics.mode = MatchMode::Monomorphism;
    } else {
      r.fail("count.mode", "expected \"induced\" or \"monomorphism\"");
    }
    s.count_semantics.respect_features = r.flag("count.respect_features", true);
  }
  r.finish();
  return s;
}

// ---------------------------------------------------------------------------
// Artifact helpers

fs::path artifact(const Settings& s, const char* name) { return s.out_dir / name; }

fs::path require_artifact(const Settings& s, const char* name, const char* producer) {
  auto p = artifact(s, name);
  if (!fs::exists(p)) {
    throw Error(ErrorCode::IoError, "missing " + p.string() + " (run `gridmotif " + producer +
                                        "` first)");
  }
  return p;
}

void update_summary(const Settings& s, const std::string& section, Json value) {
  const auto path = artifact(s, kSummaryFile);
  Json summary = Json::object();
  if (fs::exists(path)) {
    summary = Json::parse(read_text_file(path), nullptr, false);
    if (!summary.is_object()) summary = Json::object();
  }
  summary[section] = std::move(value);
  write_text_file(path, summary.dump(2) + "\n");
}

Json read_json(const fs::path& path) {
  auto j = Json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, path.string() + ": invalid JSON");
  return j;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

GraphCorpus load_settings_corpus(const Settings& s) {
  if (!s.corpus_paths.empty()) return load_corpus(s.corpus_paths, s.bucket_width);
  if (s.synthetic) return synthetic_corpus(*s.synthetic, s.synthetic_seed);
  throw Error(ErrorCode::ConfigError, "corpus.paths: no corpus configured");
}

/// Feature layout for training: the corpus buckets when a corpus is
/// configured, otherwise those stored in the existing checkpoint.
FeatureSpec feature_spec(const Settings& s) {
  return FeatureSpec{load_settings_corpus(s).voltage_buckets};
}

struct Model {
  EncoderParams params;
  double threshold = 0.1;
};

Model load_model(const Settings& s) {
  Model m{load_checkpoint(require_artifact(s, kCheckpointFile, "train")), 0.1};
  const auto info = read_json(require_artifact(s, kModelFile, "train"));
  m.threshold = info.at("threshold").get<double>();
  if (s.threshold) m.threshold = *s.threshold;
  return m;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_ingest(const Settings& s, std::ostream& out) {
  const auto corpus = load_settings_corpus(s);
  write_text_file(artifact(s, kCorpusFile), corpus_to_json(corpus));
  std::size_t edges = 0;
  for (const auto& g : corpus.graphs) edges += g.edge_count();
  Json summary{{"graphs", corpus.graphs.size()},
               {"nodes", corpus.total_nodes()},
               {"edges", edges},
               {"voltage_buckets", corpus.voltage_buckets}};
  update_summary(s, "ingest", summary);
  out << "ingest: " << corpus.graphs.size() << " graphs, " << corpus.total_nodes() << " nodes, "
      << edges << " edges\n";
  return 0;
}

int cmd_sample(const Settings& s, std::ostream& out) {
  const auto corpus = load_settings_corpus(s);
  const auto pool = decompose(corpus, s.count, s.range, s.seed);
  PairOptions options;
  options.validation_fraction = s.validation_fraction;
  options.semantics.respect_features = s.mine.respect_features;
  const auto dataset = build_dataset(pool, s.pairs, s.seed, options);
  write_text_file(artifact(s, kNeighborhoodFile), neighborhoods_to_jsonl(pool));
  write_text_file(artifact(s, kDatasetFile), dataset_to_jsonl(dataset));
  update_summary(s, "sample",
                 Json{{"neighborhoods", pool.size()},
                      {"pairs", dataset.pairs.size()},
                      {"positives", dataset.positives},
                      {"negatives", dataset.negatives},
                      {"train", dataset.train.size()},
                      {"validation", dataset.validation.size()}});
  out << "sample: " << pool.size() << " neighborhoods, " << dataset.pairs.size() << " pairs ("
      << dataset.positives << " positive)\n";
  return 0;
}

std::string train_log_csv(const TrainResult& r) {
  std::string csv = "epoch,train_loss,validation_accuracy,threshold\n";
  for (const auto& e : r.log) {
    csv += std::to_string(e.epoch) + ',' + Json(e.train_loss).dump() + ',' +
           Json(e.validation_accuracy).dump() + ',' + Json(e.threshold).dump() + '\n';
  }
  return csv;
}

int cmd_train(const Settings& s, std::ostream& out) {
  const auto dataset = dataset_from_jsonl(read_text_file(require_artifact(s, kDatasetFile, "sample")));
  FeatureSpec spec;
  if (!s.corpus_paths.empty() || s.synthetic) {
    spec = feature_spec(s);
  } else {
    spec.voltage_buckets = read_json(require_artifact(s, kCorpusFile, "ingest"))
                               .at("voltage_buckets")
                               .get<std::vector<double>>();
  }
  const auto initial = EncoderParams::initialize(spec, s.dims, s.train.seed);
  auto log = logger();
  const auto result = train(dataset, initial, s.train, [&](const EpochRecord& e, const EncoderParams&) {
    log->info("epoch {} loss {:.6f} validation accuracy {:.4f}", e.epoch, e.train_loss,
              e.validation_accuracy);
  });
  save_checkpoint(result.params, artifact(s, kCheckpointFile));
  write_text_file(artifact(s, kTrainLogFile), train_log_csv(result));
  Json info{{"threshold", result.threshold},
            {"best_epoch", result.best_epoch},
            {"validation_accuracy", result.best_accuracy},
            {"fingerprint", fingerprint(result.params)},
            {"parameters", result.params.parameter_count()}};
  write_text_file(artifact(s, kModelFile), info.dump(2) + "\n");
  update_summary(s, "train", info);
  out << "train: best epoch " << result.best_epoch << ", validation accuracy "
      << result.best_accuracy << ", threshold " << result.threshold << "\n";
  return 0;
}

int cmd_embed(const Settings& s, std::ostream& out) {
  const auto model = load_model(s);
  const auto pool =
      neighborhoods_from_jsonl(read_text_file(require_artifact(s, kNeighborhoodFile, "sample")));
  const auto store = build_reference_store(model.params, pool, model.threshold);
  save_store(store, artifact(s, kStoreFile));
  const auto tables = report_norm_tables(store);
  write_text_file(artifact(s, kReferencesFile), references_csv(tables));
  update_summary(s, "embed",
                 Json{{"references", store.size()},
                      {"dimension", store.dim()},
                      {"threshold", store.threshold},
                      {"fingerprint", store.fingerprint}});
  out << "embed: " << store.size() << " reference vectors\n";
  return 0;
}

int cmd_mine(const Settings& s, std::ostream& out) {
  const auto corpus = load_settings_corpus(s);
  const auto model = load_model(s);
  const auto store = load_store(require_artifact(s, kStoreFile, "embed"));
  const auto mined = mine_motifs(corpus, store, model.params, s.mine);
  write_text_file(artifact(s, kMotifsFile), mining_to_json(mined));
  Json sizes = Json::object();
  for (const auto& [k, list] : mined.motifs) sizes[std::to_string(k)] = list.size();
  update_summary(s, "mine",
                 Json{{"trials", mined.trials},
                      {"candidates_per_size", sizes},
                      {"monotone_step_fraction", monotone_step_fraction(mined.paths)}});
  out << "mine: " << mined.motifs.size() << " ranked lists from " << mined.trials << " trials\n";
  return 0;
}

int cmd_count(const Settings& s, std::ostream& out) {
  const auto target = load_graph_file(s.count_target);
  const auto query = load_graph_file(s.count_query);
  const auto result = vf2_count(target, query, s.count_semantics, s.validation.budget);
  if (!s.out_dir.empty()) {
    write_text_file(artifact(s, "count.json"),
                    Json{{"target", target.name()},
                         {"query", query.name()},
                         {"mode", std::string(to_string(s.count_semantics.mode))},
                         {"respect_features", s.count_semantics.respect_features},
                         {"count", result.count},
                         {"complete", result.complete}}
                            .dump(2) +
                        "\n");
  }
  out << result.count << (result.complete ? "" : " (incomplete: timeout)") << "\n";
  return 0;
}

int cmd_validate(const Settings& s, std::ostream& out) {
  const auto corpus = load_settings_corpus(s);
  auto mined = mining_from_json(read_text_file(require_artifact(s, kMotifsFile, "mine")));
  const auto report = report_validation(mined, corpus, s.validation);
  write_text_file(artifact(s, kValidationFile), validation_csv(report));
  // Attach exact support to the ranked motifs.
  for (const auto& row : report.rows) {
    auto& list = mined.motifs.at(row.size);
    list[row.rank - 1].exact_count = row.exact_support;
  }
  write_text_file(artifact(s, kMotifsFile), mining_to_json(mined));
  Json sizes = Json::array();
  bool complete = true;
  for (const auto& a : report.sizes) {
    complete = complete && a.complete;
    sizes.push_back(Json{{"size", a.size},
                         {"candidates", a.candidates},
                         {"top1_match", a.top1_match},
                         {"kendall_tau", optional_json(a.kendall_tau)}});
  }
  update_summary(s, "validate",
                 Json{{"top1_agreement", report.top1_rate},
                      {"median_kendall_tau", optional_json(report.median_tau)},
                      {"complete", complete},
                      {"sizes", sizes}});
  out << "validate: top-1 agreement " << report.top1_rate << " over " << report.sizes.size()
      << " sizes\n";
  return 0;
}

int cmd_report(const Settings& s, std::ostream& out) {
  const auto store = load_store(require_artifact(s, kStoreFile, "embed"));
  const auto tables = report_norm_tables(store);
  write_text_file(artifact(s, kReferencesFile), references_csv(tables));
  write_text_file(artifact(s, "norm_by_nodes.csv"), binned_csv(tables.by_nodes, "node_count"));
  write_text_file(artifact(s, "norm_by_edges.csv"), binned_csv(tables.by_edges, "edge_count"));
  write_text_file(artifact(s, "norm_grid.csv"), grid_csv(tables));
  const auto pca = report_pca(store, std::min(s.pca_sample, store.size()), s.seed);
  write_text_file(artifact(s, kPcaFile), pca_csv(pca));
  update_summary(s, "report",
                 Json{{"references", store.size()},
                      {"spearman_nodes_norm", optional_json(tables.spearman_nodes)},
                      {"spearman_edges_norm", optional_json(tables.spearman_edges)},
                      {"pca_rows", pca.rows.size()},
                      {"pca_variance", Json::array({pca.variance1, pca.variance2})},
                      {"total_variance", pca.total_variance}});
  out << "report: " << store.size() << " references, spearman(nodes, norm) = "
      << (tables.spearman_nodes ? std::to_string(*tables.spearman_nodes) : "null") << "\n";
  return 0;
}

int cmd_pipeline(const Settings& s, std::ostream& out) {
  cmd_ingest(s, out);
  cmd_sample(s, out);
  cmd_train(s, out);
  cmd_embed(s, out);
  cmd_mine(s, out);
  cmd_validate(s, out);
  cmd_report(s, out);
  return 0;
}

using Command = int (*)(const Settings&, std::ostream&);

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> table{
      {"ingest", cmd_ingest}, {"sample", cmd_sample},     {"train", cmd_train},
      {"embed", cmd_embed},   {"mine", cmd_mine},         {"count", cmd_count},
      {"validate", cmd_validate}, {"report", cmd_report}, {"pipeline", cmd_pipeline}};
  return table;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message,
                 const std::vector<std::string>& keys = {}) {
  Json record{{"error", {{"code", code}, {"message", message}}}};
  if (!keys.empty()) record["error"]["keys"] = keys;
  err << record.dump() << "\n";
}

/// Splits leftover "--a.b value" / "--a.b=value" tokens into overrides.
std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() <= 2) {
      throw Error(ErrorCode::ConfigError, "unexpected argument '" + tok + "'");
    }
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(tok.substr(2, eq - 2), tok.substr(eq + 1));
    } else if (i + 1 < extras.size()) {
      out.emplace_back(tok.substr(2), extras[++i]);
    } else {
      throw Error(ErrorCode::ConfigError, "option '" + tok + "' needs a value");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motif mining over graph corpora with learned order embeddings", "gridmotif"};
  app.allow_extras();
  app.set_help_flag();
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<unsigned> threads;
  app.add_option("command", command, "ingest|sample|train|embed|mine|count|validate|report|pipeline");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    print_error(err, "UsageError", e.what());
    return 2;
  }

  try {
    if (command.empty() || !commands().contains(command)) {
      throw Error(ErrorCode::InvalidArgument,
                  command.empty() ? "no command given" : "unknown command '" + command + "'");
    }
    RunConfig config;
    if (!config_path.empty()) config = RunConfig::from_file(config_path);
    for (const auto& [key, value] : parse_overrides(app.remaining())) config.set(key, value);
    if (!out_dir.empty()) config.set("out", Json(out_dir).dump());
    if (threads) config.set("threads", std::to_string(*threads));
    if (command == "count" && !config.has("out")) config.set("out", "\"\"");

    auto settings = read_settings(config, command);
    set_thread_count(settings.threads);
    if (!settings.out_dir.empty()) fs::create_directories(settings.out_dir);
    logger()->info("running {}", command);
    return commands().at(command)(settings, out);
  } catch (const ConfigIssues& e) {
    print_error(err, to_string(e.code()), e.what(), e.keys());
    return 2;
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
    return 1;
  }
}

}  // namespace gridmotif::cli
