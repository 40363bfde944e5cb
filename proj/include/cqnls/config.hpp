#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cqnls {

enum class ValueType { Real, Integer, Text, RealList, Flag };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
};

const std::vector<std::string>& command_names();
/// Every key `command` accepts, shared keys first, with defaults. Throws ConfigError for an unknown command.
const std::vector<KeySpec>& command_keys(const std::string& command);

/// Parses "[a, b, c]"; a bare number is a one-element list.
std::vector<double> parse_real_list(const std::string& text);

/// Flat key = value configuration for one command. Values are validated against the key's
/// type when set and kept as given, so the manifest reproduces them verbatim.
class RunConfig {
 public:
  explicit RunConfig(std::string command);

  const std::string& command() const { return command_; }
  const std::vector<KeySpec>& keys() const { return *keys_; }

  /// Throws ConfigError naming the key for unknown keys and ill-typed values.
  void set(const std::string& key, const std::string& value);
  /// Lines "key = value"; '#' starts a comment. A "command" line must name this command.
  void merge_file(const std::filesystem::path& path);
  /// Reads PREFIX + KEY for every known key, with '-' mapped to '_' and letters upper-cased.
  void merge_environment(const std::string& prefix = "CQNLS_");

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  bool flag(const std::string& key) const;

  std::filesystem::path output_dir() const { return text("output-dir"); }
  long long seed() const { return integer("seed"); }

  /// "command = ..." followed by every key in table order.
  std::string manifest() const;

 private:
  const KeySpec& spec(const std::string& key) const;
  const std::string& raw(const std::string& key, ValueType type) const;

  std::string command_;
  const std::vector<KeySpec>* keys_;
  std::map<std::string, std::string> values_;
};

}  // namespace cqnls
