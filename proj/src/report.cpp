#include "cqnls/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "cqnls/errors.hpp"

namespace cqnls {

Verdict make_verdict(int criterion, std::string check, bool pass, double measured, double expected, double tolerance) {
  if (criterion < 1 || criterion > 10) throw InvalidArgument("verdict references unknown criterion " + std::to_string(criterion));
  return {criterion, std::move(check), pass, measured, expected, tolerance};
}

bool ScanReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].find_first_of(",\"\n") != std::string::npos) {
        throw InvalidArgument("CSV cell '" + cells[i] + "' needs quoting");
      }
      out << (i ? "," : "") << cells[i];
    }
    out << '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("CSV row width differs from the header");
    line(row);
  }
}

std::string verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["criterion"] = v.criterion;
  j["check"] = v.check;
  j["pass"] = v.pass;
  j["measured"] = v.measured;
  j["expected"] = v.expected;
  j["tolerance"] = v.tolerance;
  return j.dump();
}

void write_verdicts(const std::vector<Verdict>& verdicts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& v : verdicts) out << verdict_json(v) << '\n';
}

}  // namespace cqnls
