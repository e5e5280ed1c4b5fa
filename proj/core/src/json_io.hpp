#pragma once

#include <json.hpp>

#include "gridmotif/graph.hpp"

namespace gridmotif::detail {

using Json = nlohmann::ordered_json;

Json graph_to_json(const Graph& g);

/// Validates against the native case schema; errors name the offending field
/// path relative to `path`.
Graph graph_from_json(const Json& j, const std::string& path = "$");

Json neighborhood_to_json(const Neighborhood& n);
Neighborhood neighborhood_from_json(const Json& j, const std::string& path = "$");

}  // namespace gridmotif::detail
