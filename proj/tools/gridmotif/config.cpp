#include "config.hpp"

#include "gridmotif/error.hpp"
#include "gridmotif/ingest.hpp"

namespace gridmotif::cli {

namespace {

std::vector<std::string> split_dotted(std::string_view dotted) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    parts.emplace_back(dotted.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts) {
    if (p.empty()) throw Error(ErrorCode::ConfigError, "malformed config key '" + std::string(dotted) + "'");
  }
  return parts;
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  Json root;
  try {
    root = Json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ConfigError, path.string() + ": top level must be an object");
  return RunConfig(std::move(root));
}

void RunConfig::set(std::string_view dotted, std::string_view value_text) {
  const auto parts = split_dotted(dotted);
  Json* node = &root_;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto& child = (*node)[parts[i]];
    if (!child.is_object()) child = Json::object();
    node = &child;
  }
  Json value = Json::parse(value_text, nullptr, false);
  if (value.is_discarded()) value = std::string(value_text);
  (*node)[parts.back()] = std::move(value);
}

const Json* RunConfig::find(std::string_view dotted) const {
  const Json* node = &root_;
  for (const auto& part : split_dotted(dotted)) {
    if (!node->is_object()) return nullptr;
    const auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

const Json* ConfigReader::lookup(std::string_view key, bool required) {
  const Json* j = config_.find(key);
  if (!j && required) fail(key, "required key is missing");
  return j;
}

void ConfigReader::fail(std::string_view key, std::string_view why) {
  keys_.emplace_back(key);
  problems_.push_back(std::string(key) + ": " + std::string(why));
}

std::size_t ConfigReader::size(std::string_view key, std::optional<std::size_t> fallback) {
  const Json* j = lookup(key, !fallback);
  if (!j) return fallback.value_or(0);
  if (!j->is_number_integer() || j->get<long long>() < 0) {
    fail(key, "expected a non-negative integer");
    return fallback.value_or(0);
  }
  return j->get<std::size_t>();
}

std::uint64_t ConfigReader::u64(std::string_view key, std::optional<std::uint64_t> fallback) {
  const Json* j = lookup(key, !fallback);
  if (!j) return fallback.value_or(0);
  if (!j->is_number_integer() || (j->is_number_integer() && !j->is_number_unsigned() && j->get<long long>() < 0)) {
    fail(key, "expected a non-negative integer");
    return fallback.value_or(0);
  }
  return j->get<std::uint64_t>();
}

double ConfigReader::real(std::string_view key, std::optional<double> fallback) {
  const Json* j = lookup(key, !fallback);
  if (!j) return fallback.value_or(0.0);
  if (!j->is_number()) {
    fail(key, "expected a number");
    return fallback.value_or(0.0);
  }
  return j->get<double>();
}

bool ConfigReader::flag(std::string_view key, std::optional<bool> fallback) {
  const Json* j = lookup(key, !fallback);
  if (!j) return fallback.value_or(false);
  if (!j->is_boolean()) {
    fail(key, "expected true or false");
    return fallback.value_or(false);
  }
  return j->get<bool>();
}

std::string ConfigReader::text(std::string_view key, std::optional<std::string> fallback) {
  const Json* j = lookup(key, !fallback);
  if (!j) return fallback.value_or("");
  if (!j->is_string()) {
    fail(key, "expected a string");
    return fallback.value_or("");
  }
  return j->get<std::string>();
}

std::vector<std::size_t> ConfigReader::sizes(std::string_view key, std::vector<std::size_t> fallback) {
  const Json* j = lookup(key, false);
  if (!j) return fallback;
  std::vector<std::size_t> out;
  if (!j->is_array()) {
    fail(key, "expected an array of non-negative integers");
    return fallback;
  }
  for (const auto& e : *j) {
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      fail(key, "expected an array of non-negative integers");
      return fallback;
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<std::string> ConfigReader::strings(std::string_view key, std::vector<std::string> fallback) {
  const Json* j = lookup(key, false);
  if (!j) return fallback;
  if (j->is_string()) return {j->get<std::string>()};
  std::vector<std::string> out;
  if (!j->is_array()) {
    fail(key, "expected an array of strings");
    return fallback;
  }
  for (const auto& e : *j) {
    if (!e.is_string()) {
      fail(key, "expected an array of strings");
      return fallback;
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

void ConfigReader::finish() const {
  if (problems_.empty()) return;
  std::string msg = "invalid configuration: ";
  for (std::size_t i = 0; i < problems_.size(); ++i) {
    if (i) msg += "; ";
    msg += problems_[i];
  }
  throw ConfigIssues(msg, keys_);
}

}  // namespace gridmotif::cli
