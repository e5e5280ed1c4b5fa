#include "json_io.hpp"

#include <algorithm>
#include <cmath>

#include "gridmotif/error.hpp"

namespace gridmotif::detail {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

NodeId read_id(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0 || v > static_cast<long long>(std::numeric_limits<NodeId>::max() - 1)) {
    schema_error(path, "id out of range");
  }
  return static_cast<NodeId>(v);
}

}  // namespace

Json graph_to_json(const Graph& g) {
  Json j;
  j["name"] = g.name();
  j["nodes"] = Json::array();
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const auto& f = g.features(v);
    Json node;
    node["id"] = v;
    if (f.type == NodeType::Unknown) {
      node["type"] = nullptr;
    } else {
      node["type"] = std::string(to_string(f.type));
    }
    if (f.voltage_kv) {
      node["voltage_kv"] = *f.voltage_kv;
    } else {
      node["voltage_kv"] = nullptr;
    }
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = Json::array();
  for (const auto& e : g.edges()) j["edges"].push_back(Json::array({e.u, e.v}));
  return j;
}

Graph graph_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  std::string name;
  if (j.contains("name") && !j["name"].is_null()) {
    if (!j["name"].is_string()) schema_error(path + ".name", "expected a string");
    name = j["name"].get<std::string>();
  }
  if (!j.contains("nodes") || !j["nodes"].is_array()) schema_error(path + ".nodes", "expected an array");
  const auto& nodes = j["nodes"];
  const auto n = nodes.size();
  std::vector<NodeFeatures> features(n);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto at = path + ".nodes[" + std::to_string(i) + "]";
    const auto& node = nodes[i];
    if (!node.is_object()) schema_error(at, "expected an object");
    if (!node.contains("id")) schema_error(at + ".id", "missing");
    const NodeId id = read_id(node["id"], at + ".id");
    if (id >= n) schema_error(at + ".id", "ids must be dense from 0 (got " + std::to_string(id) + ")");
    if (seen[id]) schema_error(at + ".id", "duplicate id " + std::to_string(id));
    seen[id] = true;
    NodeFeatures f;
    if (node.contains("type") && !node["type"].is_null()) {
      if (!node["type"].is_string()) schema_error(at + ".type", "expected a string or null");
      const auto parsed = parse_node_type(node["type"].get<std::string>());
      if (!parsed) schema_error(at + ".type", "expected PQ, PV, REF or null");
      f.type = *parsed;
    }
    if (node.contains("voltage_kv") && !node["voltage_kv"].is_null()) {
      if (!node["voltage_kv"].is_number()) schema_error(at + ".voltage_kv", "expected a number or null");
      const double kv = node["voltage_kv"].get<double>();
      if (!std::isfinite(kv) || kv < 0.0) schema_error(at + ".voltage_kv", "must be finite and >= 0");
      f.voltage_kv = kv;
    }
    features[id] = f;
  }

  std::vector<EdgePair> edges;
  if (j.contains("edges")) {
    if (!j["edges"].is_array()) schema_error(path + ".edges", "expected an array");
    const auto& list = j["edges"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto at = path + ".edges[" + std::to_string(i) + "]";
      if (!list[i].is_array() || list[i].size() != 2) schema_error(at, "expected [u, v]");
      const NodeId a = read_id(list[i][0], at + "[0]");
      const NodeId b = read_id(list[i][1], at + "[1]");
      if (a >= n || b >= n) schema_error(at, "endpoint is not a declared node");
      if (a == b) schema_error(at, "self-loop");
      edges.emplace_back(a, b);
    }
  } else {
    schema_error(path + ".edges", "missing");
  }
  return Graph::build(std::move(name), std::move(features), edges);
}

Json neighborhood_to_json(const Neighborhood& n) {
  Json j;
  j["graph"] = graph_to_json(n.graph());
  j["anchor"] = n.anchor();
  if (n.source()) {
    j["source"] = {{"graph", n.source()->graph_name},
                   {"graph_index", n.source()->graph_index},
                   {"original_ids", n.source()->original_ids}};
  }
  return j;
}

Neighborhood neighborhood_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  if (!j.contains("graph")) schema_error(path + ".graph", "missing");
  Graph g = graph_from_json(j["graph"], path + ".graph");
  if (!j.contains("anchor")) schema_error(path + ".anchor", "missing");
  const NodeId anchor = read_id(j["anchor"], path + ".anchor");
  std::optional<NeighborhoodSource> source;
  if (j.contains("source") && !j["source"].is_null()) {
    const auto& s = j["source"];
    NeighborhoodSource src;
    try {
      src.graph_name = s.at("graph").get<std::string>();
      src.graph_index = s.at("graph_index").get<std::size_t>();
      src.original_ids = s.at("original_ids").get<std::vector<NodeId>>();
    } catch (const std::exception& e) {
      schema_error(path + ".source", e.what());
    }
    source = std::move(src);
  }
  try {
    return Neighborhood(std::move(g), anchor, std::move(source));
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

}  // namespace gridmotif::detail
