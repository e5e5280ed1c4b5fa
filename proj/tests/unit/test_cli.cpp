#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "graphs.hpp"
#include "gridmotif/ingest.hpp"
#include "gridmotif/synthetic.hpp"

using namespace gridmotif;
using namespace gridmotif::testing;
namespace fs = std::filesystem;
using cli::Json;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("gridmotif_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json error_of(const Outcome& o) {
  const auto j = Json::parse(o.err.substr(o.err.rfind("{\"error\"")));
  return j.at("error");
}

constexpr const char* kSmallPipeline = R"({
  "corpus": {"synthetic": {"families": ["tree", "grid", "star"], "graph_count": 12,
                           "min_nodes": 10, "max_nodes": 18}},
  "sampling": {"seed": 5, "count": 150, "min_nodes": 3, "max_nodes": 8, "pairs": 120},
  "encoder": {"epochs": 2, "hidden": 8, "embed": 8, "layers": 3},
  "mining": {"sizes": [3, 4], "trials": 20},
  "validation": {"timeout_ms": 5000},
  "report": {"pca_sample": 50}
})";

std::map<std::string, std::string> read_all(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    files[e.path().filename().string()] = read_text_file(e.path());
  }
  return files;
}

}  // namespace

TEST_SUITE("cli_report") {

TEST_CASE("count prints the occurrence count") {
  const auto dir = scratch("count");
  write_text_file(dir / "k4.json", to_json_case(complete_graph(4).renamed("k4")));
  write_text_file(dir / "tri.json", to_json_case(make_graph(3, {{0, 1}, {1, 2}, {0, 2}})));
  write_text_file(dir / "cfg.json", "{}");
  const auto o = run_cli({"count", "--config", (dir / "cfg.json").string(), "--count.target",
                          (dir / "k4.json").string(), "--count.query=" + (dir / "tri.json").string()});
  CHECK(o.code == 0);
  CHECK(o.out == "4\n");
  const auto mono = run_cli({"count", "--config", (dir / "cfg.json").string(), "--count.target",
                             (dir / "k4.json").string(), "--count.query",
                             (dir / "tri.json").string(), "--count.mode", "monomorphism"});
  CHECK(mono.out == "4\n");
}

TEST_CASE("configuration errors are machine readable") {
  const auto dir = scratch("errors");
  write_text_file(dir / "cfg.json", R"({"sampling": {"count": 10}})");
  const auto missing = run_cli({"sample", "--config", (dir / "cfg.json").string(), "--out",
                                (dir / "out").string()});
  CHECK(missing.code != 0);
  const auto e = error_of(missing);
  CHECK(e.at("code") == "ConfigError");
  CHECK(e.at("keys").dump().find("sampling.seed") != std::string::npos);

  write_text_file(dir / "bad.json",
                  R"({"sampling": {"seed": "x", "count": -1}, "encoder": {"reduction": "median"}})");
  const auto bad = run_cli({"train", "--config", (dir / "bad.json").string(), "--out", (dir / "out").string()});
  const auto keys = error_of(bad).at("keys").dump();
  for (const char* key : {"sampling.seed", "sampling.count", "encoder.reduction"}) {
    CHECK(keys.find(key) != std::string::npos);
  }
  // A flag of the same dotted name overrides the file.
  const auto fixed = run_cli({"ingest", "--config", (dir / "bad.json").string(), "--out",
                              (dir / "out").string(), "--sampling.seed", "3", "--sampling.count", "5",
                              "--encoder.reduction", "sum", "--corpus.synthetic.graph_count", "3"});
  CHECK(fixed.code == 0);
  CHECK(fs::exists(dir / "out" / "corpus.json"));

  CHECK(run_cli({"frobnicate", "--config", (dir / "cfg.json").string()}).code != 0);
  CHECK(run_cli({"count", "--config", (dir / "nope.json").string()}).code != 0);
  const auto stale = run_cli({"mine", "--config", (dir / "cfg.json").string(), "--out",
                              (dir / "empty").string(), "--sampling.seed", "1"});
  CHECK(stale.code != 0);
  CHECK(error_of(stale).contains("code"));
}

TEST_CASE("pipeline writes every artifact and is reproducible") {
  const auto dir = scratch("pipeline");
  write_text_file(dir / "cfg.json", kSmallPipeline);
  const auto a = run_cli({"pipeline", "--config", (dir / "cfg.json").string(), "--out",
                          (dir / "a").string(), "--threads", "1"});
  REQUIRE(a.code == 0);
  for (const char* name : {"references.csv", "pca.csv", "motifs.json", "validation.csv",
                           "summary.json", "encoder.ckpt", "store.bin"}) {
    CHECK(fs::exists(dir / "a" / name));
  }
  const auto b = run_cli({"pipeline", "--config", (dir / "cfg.json").string(), "--out",
                          (dir / "b").string(), "--threads", "4"});
  REQUIRE(b.code == 0);
  CHECK(read_all(dir / "a") == read_all(dir / "b"));

  const auto summary = Json::parse(read_text_file(dir / "a" / "summary.json"));
  for (const char* section : {"ingest", "sample", "train", "embed", "mine", "validate", "report"}) {
    CHECK(summary.contains(section));
  }
  const auto motifs = Json::parse(read_text_file(dir / "a" / "motifs.json"));
  CHECK(motifs.dump().find("\"3\"") != std::string::npos);
  // references.csv has one row per reference vector.
  const auto refs = read_text_file(dir / "a" / "references.csv");
  CHECK(static_cast<std::size_t>(std::count(refs.begin(), refs.end(), '\n')) == 151);
}

}  // TEST_SUITE
