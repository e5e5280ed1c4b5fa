#include "gridmotif/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "gridmotif/error.hpp"
#include "gridmotif/parallel.hpp"
#include "json_io.hpp"

namespace gridmotif {

std::size_t GraphCorpus::total_nodes() const {
  std::size_t total = 0;
  for (const auto& g : graphs) total += g.node_count();
  return total;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

// --- MATPOWER ------------------------------------------------------------

std::string strip_matlab_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '%') in_comment = true;
    if (c == '\n') in_comment = false;
    if (!in_comment) out += c;
  }
  return out;
}

// Rows of the `mpc.<field> = [ ... ];` matrix, split on ';' and newlines.
std::vector<std::vector<double>> matrix_block(const std::string& text, const std::string& field) {
  const std::string key = "mpc." + field;
  std::size_t pos = 0;
  for (;;) {
    pos = text.find(key, pos);
    if (pos == std::string::npos) {
      throw Error(ErrorCode::MissingBlock, "MATPOWER case has no `" + key + " = [...]` block");
    }
    std::size_t cursor = pos + key.size();
    // Reject prefixes of longer names such as mpc.bus_name.
    if (cursor < text.size() && (std::isalnum(static_cast<unsigned char>(text[cursor])) ||
                                 text[cursor] == '_')) {
      pos = cursor;
      continue;
    }
    while (cursor < text.size() && std::isspace(static_cast<unsigned char>(text[cursor]))) ++cursor;
    if (cursor >= text.size() || text[cursor] != '=') {
      pos = cursor;
      continue;
    }
    ++cursor;
    while (cursor < text.size() && std::isspace(static_cast<unsigned char>(text[cursor]))) ++cursor;
    if (cursor >= text.size() || text[cursor] != '[') {
      pos = cursor;
      continue;
    }
    const auto close = text.find(']', cursor);
    if (close == std::string::npos) {
      throw Error(ErrorCode::MissingBlock, "unterminated `" + key + "` block");
    }
    const std::string body = text.substr(cursor + 1, close - cursor - 1);

    std::vector<std::vector<double>> rows;
    std::string row;
    auto flush = [&] {
      std::vector<double> values;
      std::string token;
      std::istringstream in(row);
      while (in >> token) {
        // Commas are legal column separators in MATLAB matrices.
        std::stringstream parts(token);
        std::string piece;
        while (std::getline(parts, piece, ',')) {
          if (piece.empty()) continue;
          auto v = parse_number(piece);
          if (!v) {
            throw Error(ErrorCode::MalformedRow, "mpc." + field + " row " +
                                                     std::to_string(rows.size() + 1) +
                                                     ": bad number '" + piece + "'");
          }
          values.push_back(*v);
        }
      }
      if (!values.empty()) rows.push_back(std::move(values));
      row.clear();
    };
    for (char c : body) {
      if (c == ';' || c == '\n') {
        flush();
      } else {
        row += c;
      }
    }
    flush();
    return rows;
  }
}

std::string matpower_name(std::string_view text) {
  // function mpc = case9
  const auto fn = text.find("function");
  if (fn == std::string_view::npos) return {};
  const auto eq = text.find('=', fn);
  if (eq == std::string_view::npos) return {};
  auto rest = text.substr(eq + 1);
  const auto end = rest.find_first_of("\r\n;(");
  return std::string(trim(rest.substr(0, end)));
}

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

Graph parse_matpower_case(std::string_view text, ParseStats* stats,
                          const MatpowerOptions& options) {
  constexpr std::size_t kBusColumns = 13;
  constexpr std::size_t kBranchColumns = 11;
  const std::string clean = strip_matlab_comments(text);
  const auto bus_rows = matrix_block(clean, "bus");
  const auto branch_rows = matrix_block(clean, "branch");

  std::map<long long, NodeId> bus_index;
  std::vector<NodeFeatures> nodes;
  nodes.reserve(bus_rows.size());
  for (std::size_t r = 0; r < bus_rows.size(); ++r) {
    const auto& row = bus_rows[r];
    const std::string where = "mpc.bus row " + std::to_string(r + 1);
    if (row.size() < kBusColumns) {
      throw Error(ErrorCode::MalformedRow, where + ": expected at least " +
                                               std::to_string(kBusColumns) + " columns, got " +
                                               std::to_string(row.size()));
    }
    if (!is_integral(row[0])) throw Error(ErrorCode::MalformedRow, where + ": bus number not integral");
    const auto bus = static_cast<long long>(row[0]);
    if (!bus_index.emplace(bus, static_cast<NodeId>(nodes.size())).second) {
      throw Error(ErrorCode::MalformedRow, where + ": duplicate bus number " + std::to_string(bus));
    }
    NodeFeatures f;
    switch (static_cast<int>(row[1])) {
      case 1: f.type = NodeType::PQ; break;
      case 2: f.type = NodeType::PV; break;
      case 3: f.type = NodeType::REF; break;
      default: f.type = NodeType::Unknown; break;
    }
    if (!std::isfinite(row[9]) || row[9] < 0.0) {
      throw Error(ErrorCode::MalformedRow, where + ": baseKV must be finite and non-negative");
    }
    f.voltage_kv = row[9];
    nodes.push_back(f);
  }

  ParseStats local;
  std::vector<EdgePair> edges;
  edges.reserve(branch_rows.size());
  for (std::size_t r = 0; r < branch_rows.size(); ++r) {
    const auto& row = branch_rows[r];
    const std::string where = "mpc.branch row " + std::to_string(r + 1);
    if (row.size() < kBranchColumns) {
      throw Error(ErrorCode::MalformedRow, where + ": expected at least " +
                                               std::to_string(kBranchColumns) + " columns, got " +
                                               std::to_string(row.size()));
    }
    if (!is_integral(row[0]) || !is_integral(row[1])) {
      throw Error(ErrorCode::MalformedRow, where + ": bus numbers not integral");
    }
    const auto from = bus_index.find(static_cast<long long>(row[0]));
    const auto to = bus_index.find(static_cast<long long>(row[1]));
    if (from == bus_index.end() || to == bus_index.end()) {
      const auto missing = from == bus_index.end() ? row[0] : row[1];
      throw Error(ErrorCode::UnknownBus, where + ": references bus " +
                                             std::to_string(static_cast<long long>(missing)) +
                                             " absent from mpc.bus");
    }
    if (row[10] == 0.0) {
      ++local.out_of_service;
      if (!options.include_out_of_service) continue;
    }
    if (from->second == to->second) {
      ++local.self_loops;
      continue;
    }
    edges.emplace_back(from->second, to->second);
  }

  Graph g = Graph::build(matpower_name(clean), std::move(nodes), edges, &local.duplicate_edges);
  if (stats) *stats = local;
  return g;
}

Graph parse_json_case(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("$: invalid JSON: ") + e.what());
  }
  return detail::graph_from_json(j);
}

std::string to_json_case(const Graph& g) { return detail::graph_to_json(g).dump(); }

Graph parse_edge_list(std::string_view text, std::string name) {
  std::vector<std::pair<long long, long long>> raw;
  std::vector<std::size_t> raw_lines;
  std::size_t line_no = 0;
  bool seen_data = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    const auto where = "line " + std::to_string(line_no);
    if (comma == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, where + ": expected 'u,v'");
    }
    const auto a = parse_number(line.substr(0, comma));
    const auto b = parse_number(line.substr(comma + 1));
    if (!a || !b) {
      if (!seen_data && !a && !b) {
        seen_data = true;  // header
        continue;
      }
      throw Error(ErrorCode::ParseError, where + ": node ids must be integers");
    }
    seen_data = true;
    if (!is_integral(*a) || !is_integral(*b) || *a < 0 || *b < 0) {
      throw Error(ErrorCode::ParseError, where + ": node ids must be non-negative integers");
    }
    if (*a == *b) {
      throw Error(ErrorCode::ParseError, where + ": self-loop on node " +
                                             std::to_string(static_cast<long long>(*a)));
    }
    raw.emplace_back(static_cast<long long>(*a), static_cast<long long>(*b));
    raw_lines.push_back(line_no);
  }

  std::vector<long long> ids;
  for (auto [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto dense = [&](long long id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  std::vector<EdgePair> edges;
  edges.reserve(raw.size());
  for (auto [a, b] : raw) edges.emplace_back(dense(a), dense(b));
  return Graph::build(std::move(name), std::vector<NodeFeatures>(ids.size()), edges);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Graph load_graph_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  const auto ext = path.extension().string();
  Graph g;
  if (ext == ".m") {
    g = parse_matpower_case(text);
  } else if (ext == ".json") {
    g = parse_json_case(text);
  } else {
    g = parse_edge_list(text);
  }
  if (g.name().empty()) g = g.renamed(path.stem().string());
  return g;
}

double bucket_voltage(double kv, double bucket_width_kv) {
  return std::round(kv / bucket_width_kv) * bucket_width_kv;
}

GraphCorpus make_corpus(std::vector<Graph> graphs, double bucket_width_kv) {
  if (!(bucket_width_kv > 0.0) || !std::isfinite(bucket_width_kv)) {
    throw Error(ErrorCode::InvalidArgument, "bucket width must be positive");
  }
  GraphCorpus corpus;
  corpus.bucket_width_kv = bucket_width_kv;
  for (auto& g : graphs) {
    auto features = g.all_features();
    bool changed = false;
    for (auto& f : features) {
      if (f.voltage_kv) {
        const double b = bucket_voltage(*f.voltage_kv, bucket_width_kv);
        changed |= b != *f.voltage_kv;
        f.voltage_kv = b;
        corpus.voltage_buckets.push_back(b);
      }
    }
    if (changed) {
      std::vector<EdgePair> edges;
      for (const auto& e : g.edges()) edges.emplace_back(e.u, e.v);
      g = Graph::build(g.name(), std::move(features), edges);
    }
  }
  std::sort(corpus.voltage_buckets.begin(), corpus.voltage_buckets.end());
  corpus.voltage_buckets.erase(
      std::unique(corpus.voltage_buckets.begin(), corpus.voltage_buckets.end()),
      corpus.voltage_buckets.end());

  corpus.graphs = std::move(graphs);
  const auto total = static_cast<double>(corpus.total_nodes());
  if (corpus.graphs.empty() || total == 0.0) {
    throw Error(ErrorCode::EmptyGraph, "corpus contains no nodes");
  }
  for (const auto& g : corpus.graphs) {
    corpus.size_weights.push_back(static_cast<double>(g.node_count()) / total);
  }
  return corpus;
}

GraphCorpus load_corpus(std::span<const std::filesystem::path> paths, double bucket_width_kv) {
  std::vector<Graph> graphs(paths.size());
  std::vector<std::optional<Error>> errors(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) {
    try {
      graphs[i] = load_graph_file(paths[i]);
    } catch (const Error& e) {
      errors[i] = e;
    }
  });
  std::string message;
  std::optional<ErrorCode> first;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (!errors[i]) continue;
    if (!first) first = errors[i]->code();
    if (!message.empty()) message += "; ";
    message += paths[i].string() + ": " + errors[i]->what();
  }
  if (first) throw Error(*first, message);
  return make_corpus(std::move(graphs), bucket_width_kv);
}

std::string corpus_to_json(const GraphCorpus& corpus) {
  detail::Json j;
  j["bucket_width_kv"] = corpus.bucket_width_kv;
  j["voltage_buckets"] = corpus.voltage_buckets;
  j["size_weights"] = corpus.size_weights;
  j["graphs"] = detail::Json::array();
  for (const auto& g : corpus.graphs) j["graphs"].push_back(detail::graph_to_json(g));
  return j.dump();
}

GraphCorpus corpus_from_json(std::string_view text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("$: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("graphs") || !j["graphs"].is_array()) {
    throw Error(ErrorCode::SchemaError, "$.graphs: expected an array");
  }
  std::vector<Graph> graphs;
  for (std::size_t i = 0; i < j["graphs"].size(); ++i) {
    graphs.push_back(detail::graph_from_json(j["graphs"][i], "$.graphs[" + std::to_string(i) + "]"));
  }
  const double width = j.value("bucket_width_kv", 1.0);
  return make_corpus(std::move(graphs), width);
}

}  // namespace gridmotif
