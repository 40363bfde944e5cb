#include "cqnls/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cqnls/errors.hpp"

namespace cqnls {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_real(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_integer(const std::string& text, long long& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_flag(const std::string& text, bool& out) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    out = true;
    return true;
  }
  if (t == "false" || t == "0" || t == "no" || t == "off") {
    out = false;
    return true;
  }
  return false;
}

const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::Real: return "a real number";
    case ValueType::Integer: return "an integer";
    case ValueType::Text: return "a string";
    case ValueType::RealList: return "a list of reals like [a,b,c]";
    case ValueType::Flag: return "true or false";
  }
  return "a value";
}

std::vector<KeySpec> shared_keys() {
  return {
      {"output-dir", ValueType::Text, "cqnls-out", "directory for CSV, SVG, manifest and verdicts"},
      {"seed", ValueType::Integer, "1", "recorded in the manifest; the built-in commands draw no random numbers"},
      {"jobs", ValueType::Integer, "1", "worker threads for independent scan points"},
      {"tol", ValueType::Real, "1e-8", "tangent-gradient residual at which minimization stops"},
      {"max-iterations", ValueType::Integer, "50000", "iteration cap per minimization"},
      {"svg", ValueType::Flag, "true", "write SVG plots"},
  };
}

std::string format_default(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::map<std::string, std::vector<KeySpec>> build_tables() {
  std::map<std::string, std::vector<KeySpec>> own{
      {"townes",
       {{"r-max", ValueType::Real, "40", "outer radius of the shooting grid"},
        {"shoot-tol", ValueType::Real, "1e-12", "bisection tolerance on Q(0)"},
        {"spacing", ValueType::Real, "0.005", "radial node spacing"},
        {"s-list", ValueType::RealList, "[1,2,3,4]", "trap powers for the Q_s constants"}}},
      {"gs",
       {{"a", ValueType::Real, "0", "cubic strength"},
        {"b", ValueType::Real, "0", "quintic strength"},
        {"s", ValueType::Real, "2", "trap power"},
        {"mode", ValueType::Text, "trapped", "trapped or homogeneous"},
        {"trap-strength", ValueType::Real, "1", "trap prefactor"},
        {"grid-points", ValueType::Integer, "256", "points per side"},
        {"half-width", ValueType::Real, "12", "box half-width"}}},
      {"phase",
       {{"a-ratios", ValueType::RealList, "[0.5,1,1.5]", "cubic strengths in units of a*"},
        {"b-values", ValueType::RealList, "[0,0.05]", "quintic strengths"},
        {"s", ValueType::Real, "2", "trap power"}}},
      {"collapse",
       {{"zeta", ValueType::Real, "0", "speed parameter of the (a, b) approach"},
        {"s", ValueType::Real, "2", "trap power"},
        {"ell-start", ValueType::Real, format_default(0.05 / std::pow(0.7, 7)),
         "first blow-up length; the default ends the 8-step 0.7 schedule at 0.05"},
        {"ell-factor", ValueType::Real, "0.7", "ratio of consecutive lengths"},
        {"steps", ValueType::Integer, "8", "number of schedule points"},
        {"grid-points", ValueType::Integer, "256", "points per side of the rescaled grid"},
        {"half-width", ValueType::Real, "16", "half-width of the rescaled box"}}},
      {"homog",
       {{"a-excess", ValueType::Real, "0.2", "a_0 / a* - 1"},
        {"a-factor", ValueType::Real, "0.6", "ratio of consecutive excesses"},
        {"b-start", ValueType::Real, "0.5", "b_0"},
        {"b-factor", ValueType::Real, "0.36", "ratio of consecutive b"},
        {"steps", ValueType::Integer, "7", "number of schedule points"},
        {"scaling-a-ratio", ValueType::Real, "1.2", "a / a* for the scaling check"},
        {"scaling-b", ValueType::RealList, "[0.5,2]", "b values compared with b = 1"},
        {"grid-points", ValueType::Integer, "256", "points per side"},
        {"half-width", ValueType::Real, "16", "box half-width in rescaled units"}}},
      {"hartree",
       {{"a-ratio", ValueType::Real, "0.8", "a / a*"},
        {"b", ValueType::Real, "1", "three-body strength"},
        {"s", ValueType::Real, "2", "trap power"},
        {"alpha", ValueType::Real, "0.1", "two-body scaling exponent"},
        {"beta", ValueType::Real, "0.15", "three-body scaling exponent"},
        {"n-list", ValueType::RealList, "[4,16,64,256]", "particle numbers"},
        {"kernel2", ValueType::Text, "gaussian", "two-body kernel: gaussian[:width] or file:<path>"},
        {"kernel3", ValueType::Text, "gaussian", "three-body factor: gaussian[:width] or file:<path>"},
        {"grid-points", ValueType::Integer, "64", "points per side"},
        {"half-width", ValueType::Real, "6", "box half-width"},
        {"max-points", ValueType::Integer, "64", "largest grid side for three-body evaluation"}}},
      {"lemma",
       {{"alpha", ValueType::Real, "0.25", "two-body scaling exponent"},
        {"beta", ValueType::Real, "0.25", "three-body scaling exponent"},
        {"n-list", ValueType::RealList, "[4,16,64,256,1024]", "particle numbers, ascending"},
        {"v-width", ValueType::Real, "1", "width w of the test state exp(-|x|^2/(2w^2))"},
        {"kernel2", ValueType::Text, "gaussian", "two-body kernel: gaussian[:width] or file:<path>"},
        {"kernel3", ValueType::Text, "gaussian", "three-body factor: gaussian[:width] or file:<path>"},
        {"grid-points", ValueType::Integer, "128", "points per side"},
        {"half-width", ValueType::Real, "6", "box half-width"},
        {"max-points", ValueType::Integer, "128", "largest grid side for three-body evaluation"}}},
      {"hartree-collapse",
       {{"mode", ValueType::Text, "trapped", "trapped or homogeneous"},
        {"zeta", ValueType::Real, "0", "speed parameter (trapped)"},
        {"s", ValueType::Real, "2", "trap power (trapped)"},
        {"ell-start", ValueType::Real, "0.7", "first blow-up length (trapped)"},
        {"ell-factor", ValueType::Real, "0.85", "ratio of consecutive lengths (trapped)"},
        {"steps", ValueType::Integer, "3", "number of schedule points (trapped)"},
        {"a-ratio", ValueType::Real, "1.3", "a / a* (homogeneous)"},
        {"n-list", ValueType::RealList, "[1e4,1e6,1e8]", "particle numbers (homogeneous)"},
        {"alpha", ValueType::Real, "0.1", "two-body scaling exponent"},
        {"beta", ValueType::Real, "0.12", "three-body scaling exponent"},
        {"eta", ValueType::Real, "0.019", "collapse speed exponent"},
        {"kernel2", ValueType::Text, "gaussian", "two-body kernel: gaussian[:width] or file:<path>"},
        {"kernel3", ValueType::Text, "gaussian", "three-body factor: gaussian[:width] or file:<path>"},
        {"grid-points", ValueType::Integer, "512", "points per side of the rescaled grid"},
        {"half-width", ValueType::Real, "7.5", "half-width of the rescaled box"},
        {"max-points", ValueType::Integer, "64", "largest grid side for three-body evaluation"}}},
  };
  std::map<std::string, std::vector<KeySpec>> tables;
  for (auto& [name, keys] : own) {
    std::vector<KeySpec> all = shared_keys();
    all.insert(all.end(), keys.begin(), keys.end());
    tables.emplace(name, std::move(all));
  }
  return tables;
}

const std::map<std::string, std::vector<KeySpec>>& tables() {
  static const auto t = build_tables();
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"townes", "gs",    "phase",  "collapse",
                                              "homog",  "hartree", "lemma", "hartree-collapse"};
  return names;
}

const std::vector<KeySpec>& command_keys(const std::string& command) {
  const auto it = tables().find(command);
  if (it == tables().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError("unterminated list '" + text + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  if (trim(t).empty()) return out;
  std::istringstream in(t);
  std::string item;
  while (std::getline(in, item, ',')) {
    double v = 0.0;
    if (!parse_real(item, v)) throw ConfigError("list entry '" + trim(item) + "' is not a real number");
    out.push_back(v);
  }
  return out;
}

RunConfig::RunConfig(std::string command) : command_(std::move(command)), keys_(&command_keys(command_)) {
  for (const auto& k : *keys_) values_[k.key] = k.default_value;
}

const KeySpec& RunConfig::spec(const std::string& key) const {
  for (const auto& k : *keys_) {
    if (k.key == key) return k;
  }
  throw ConfigError("unknown key '" + key + "' for command '" + command_ + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& k = spec(key);
  const std::string v = trim(value);
  bool ok = true;
  switch (k.type) {
    case ValueType::Real: {
      double d = 0.0;
      ok = parse_real(v, d);
      break;
    }
    case ValueType::Integer: {
      long long i = 0;
      ok = parse_integer(v, i);
      break;
    }
    case ValueType::Flag: {
      bool b = false;
      ok = parse_flag(v, b);
      break;
    }
    case ValueType::RealList:
      try {
        parse_real_list(v);
      } catch (const ConfigError&) {
        ok = false;
      }
      break;
    case ValueType::Text:
      ok = !v.empty();
      break;
  }
  if (!ok) throw ConfigError("key '" + key + "': expected " + type_name(k.type) + ", got '" + value + "'");
  values_[key] = v;
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key == "command") {
      if (value != command_) {
        throw ConfigError(path.string() + " is a '" + value + "' config, not '" + command_ + "'");
      }
      continue;
    }
    set(key, value);
  }
}

void RunConfig::merge_environment(const std::string& prefix) {
  for (const auto& k : *keys_) {
    std::string name = prefix;
    for (char c : k.key) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(name.c_str())) set(k.key, v);
  }
}

const std::string& RunConfig::raw(const std::string& key, ValueType type) const {
  if (spec(key).type != type) throw ConfigError("key '" + key + "' is not " + type_name(type));
  return values_.at(key);
}

double RunConfig::real(const std::string& key) const {
  double v = 0.0;
  parse_real(raw(key, ValueType::Real), v);
  return v;
}

long long RunConfig::integer(const std::string& key) const {
  long long v = 0;
  parse_integer(raw(key, ValueType::Integer), v);
  return v;
}

const std::string& RunConfig::text(const std::string& key) const { return raw(key, ValueType::Text); }

std::vector<double> RunConfig::reals(const std::string& key) const {
  return parse_real_list(raw(key, ValueType::RealList));
}

bool RunConfig::flag(const std::string& key) const {
  bool v = false;
  parse_flag(raw(key, ValueType::Flag), v);
  return v;
}

std::string RunConfig::manifest() const {
  std::ostringstream out;
  out << "command = " << command_ << "\n";
  for (const auto& k : *keys_) out << k.key << " = " << values_.at(k.key) << "\n";
  return out.str();
}

}  // namespace cqnls
