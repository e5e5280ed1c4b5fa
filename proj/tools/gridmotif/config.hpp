#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gridmotif/error.hpp"

namespace gridmotif::cli {

using Json = nlohmann::ordered_json;

/// Configuration failure that names every offending key.
class ConfigIssues : public Error {
 public:
  ConfigIssues(const std::string& message, std::vector<std::string> keys)
      : Error(ErrorCode::ConfigError, message), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

/// Parsed JSON config with dotted-path access and command-line overrides.
class RunConfig {
 public:
  RunConfig() : root_(Json::object()) {}
  explicit RunConfig(Json root) : root_(std::move(root)) {}

  static RunConfig from_file(const std::filesystem::path& path);

  /// Sets a dotted key. The value text is read as JSON when it parses,
  /// otherwise as a plain string.
  void set(std::string_view dotted, std::string_view value_text);

  const Json* find(std::string_view dotted) const;
  bool has(std::string_view dotted) const { return find(dotted) != nullptr; }

  const Json& root() const { return root_; }

 private:
  Json root_;
};

/// Typed reads that record every problem instead of failing on the first.
class ConfigReader {
 public:
  explicit ConfigReader(const RunConfig& config) : config_(config) {}

  std::size_t size(std::string_view key, std::optional<std::size_t> fallback = {});
  std::uint64_t u64(std::string_view key, std::optional<std::uint64_t> fallback = {});
  double real(std::string_view key, std::optional<double> fallback = {});
  bool flag(std::string_view key, std::optional<bool> fallback = {});
  std::string text(std::string_view key, std::optional<std::string> fallback = {});
  std::vector<std::size_t> sizes(std::string_view key, std::vector<std::size_t> fallback);
  std::vector<std::string> strings(std::string_view key, std::vector<std::string> fallback);

  void fail(std::string_view key, std::string_view why);

  /// Throws ConfigError listing every offending key when any read failed.
  void finish() const;

  const std::vector<std::string>& keys() const { return keys_; }

 private:
  const Json* lookup(std::string_view key, bool required);

  const RunConfig& config_;
  std::vector<std::string> keys_;
  std::vector<std::string> problems_;
};

}  // namespace gridmotif::cli
