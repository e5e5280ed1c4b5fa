#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridmotif/graph.hpp"

namespace gridmotif {

/// Graphs plus the size-proportional selection distribution used by both
/// reference decomposition and motif growth.
struct GraphCorpus {
  std::vector<Graph> graphs;
  /// Sorted distinct bucketed voltages present in graphs.
  std::vector<double> voltage_buckets;
  /// node_count / total node count, per graph.
  std::vector<double> size_weights;
  double bucket_width_kv = 1.0;

  std::size_t total_nodes() const;
};

struct ParseStats {
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
  std::size_t out_of_service = 0;
};

struct MatpowerOptions {
  bool include_out_of_service = true;
};

/// Reads bus columns 1, 2 and 10 (number, type, baseKV) and branch columns
/// 1, 2 and 11 (from, to, status). Everything else is ignored.
Graph parse_matpower_case(std::string_view text, ParseStats* stats = nullptr,
                          const MatpowerOptions& options = {});

/// Native JSON case format.
Graph parse_json_case(std::string_view text);
std::string to_json_case(const Graph& g);

/// One "u,v" pair per line; "#" comments, blank lines and a non-numeric
/// header line are skipped. Ids are densified in ascending order.
Graph parse_edge_list(std::string_view text, std::string name = {});

/// Dispatches on extension: .m (MATPOWER), .json (native), anything else as an
/// edge list. The file stem names graphs that carry no name of their own.
Graph load_graph_file(const std::filesystem::path& path);

double bucket_voltage(double kv, double bucket_width_kv);

/// Buckets voltages and computes size weights for in-memory graphs.
GraphCorpus make_corpus(std::vector<Graph> graphs, double bucket_width_kv = 1.0);

/// Parses files concurrently; graphs keep input order. Failures from all files
/// are reported together, each prefixed with its path.
GraphCorpus load_corpus(std::span<const std::filesystem::path> paths,
                        double bucket_width_kv = 1.0);

std::string corpus_to_json(const GraphCorpus& corpus);
GraphCorpus corpus_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace gridmotif
