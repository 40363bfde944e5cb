#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqnls/config.hpp"
#include "cqnls/errors.hpp"
#include "cqnls/report.hpp"
#include "cqnls/run.hpp"
#include "cqnls/svg.hpp"

using namespace cqnls;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cqnls_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Invocation {
  int status;
  std::string output;
};

/// Runs the CLI binary named by CQNLS_BINARY with stderr merged into the captured output.
Invocation invoke(const std::string& args, const std::string& env = "") {
  const char* binary = std::getenv("CQNLS_BINARY");
  REQUIRE_MESSAGE(binary != nullptr, "CQNLS_BINARY must name the cqnls executable");
  const std::string cmd = env + " '" + std::string(binary) + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Minimal well-formedness check: every element closes in order and attribute quotes balance.
bool well_formed_xml(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = doc.find('<', i)) != std::string::npos) {
    const std::size_t end = doc.find('>', i);
    if (end == std::string::npos) return false;
    const std::string tag = doc.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag.front() == '?' || tag.front() == '!') continue;
    std::size_t quotes = 0;
    for (char c : tag) quotes += c == '"';
    if (quotes % 2 != 0) return false;
    if (tag.front() == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      stack.push_back(tag.substr(0, tag.find_first_of(" \n")));
    }
  }
  return stack.empty();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t i = hay.find(needle); i != std::string::npos; i = hay.find(needle, i + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("config keys carry defaults and reject ill-typed values by name") {
  RunConfig c("collapse");
  CHECK(c.real("zeta") == 0.0);
  CHECK(c.integer("steps") == 8);
  CHECK(c.flag("svg"));
  CHECK(c.text("output-dir") == "cqnls-out");
  c.set("zeta", "1.5");
  CHECK(c.real("zeta") == 1.5);
  try {
    c.set("steps", "eight");
    FAIL("ill-typed value accepted");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("'steps'") != std::string::npos);
    CHECK(what.find("an integer") != std::string::npos);
  }
  CHECK_THROWS_AS(c.set("no-such-key", "1"), ConfigError);
  CHECK_THROWS_AS(c.set("svg", "maybe"), ConfigError);
  CHECK_THROWS_AS(RunConfig("frobnicate"), ConfigError);
  CHECK_THROWS_AS(c.real("steps"), ConfigError);
}

TEST_CASE("real lists parse with and without brackets") {
  CHECK(parse_real_list("[1, 2.5,1e3]") == std::vector<double>{1.0, 2.5, 1000.0});
  CHECK(parse_real_list("4") == std::vector<double>{4.0});
  CHECK(parse_real_list("[]").empty());
  CHECK_THROWS_AS(parse_real_list("[1,2"), ConfigError);
  CHECK_THROWS_AS(parse_real_list("[1,x]"), ConfigError);
}

TEST_CASE("every command exposes the shared keys and a unique key table") {
  for (const auto& name : command_names()) {
    const auto& keys = command_keys(name);
    REQUIRE(keys.size() >= 6);
    CHECK(keys[0].key == "output-dir");
    for (std::size_t i = 0; i < keys.size(); ++i) {
      for (std::size_t j = i + 1; j < keys.size(); ++j) CHECK(keys[i].key != keys[j].key);
      RunConfig probe(name);
      CHECK_NOTHROW(probe.set(keys[i].key, keys[i].default_value));
    }
  }
}

TEST_CASE("manifest round-trips through a config file and files for other commands are refused") {
  const fs::path dir = scratch("manifest");
  RunConfig c("hartree");
  c.set("n-list", "[4,16]");
  c.set("alpha", "0.12");
  std::ofstream(dir / "m.cfg") << c.manifest();
  RunConfig back("hartree");
  back.merge_file(dir / "m.cfg");
  CHECK(back.manifest() == c.manifest());
  CHECK(back.reals("n-list") == std::vector<double>{4.0, 16.0});
  RunConfig other("lemma");
  CHECK_THROWS_AS(other.merge_file(dir / "m.cfg"), ConfigError);
  std::ofstream(dir / "bad.cfg") << "alpha 0.1\n";
  CHECK_THROWS_AS(back.merge_file(dir / "bad.cfg"), ConfigError);
}

TEST_CASE("environment overrides use the prefixed upper-case key") {
  RunConfig c("collapse");
  ::setenv("CQNLSTEST_ELL_FACTOR", "0.5", 1);
  c.merge_environment("CQNLSTEST_");
  ::unsetenv("CQNLSTEST_ELL_FACTOR");
  CHECK(c.real("ell-factor") == 0.5);
}

TEST_CASE("SVG output is well formed with log axes, references and one shared legend") {
  Plot p{"Coefficient & <limit>", "ell", "E", true, false,
         {{"zeta = 0", {{0.5, 0.9}, {0.25, 0.97}, {0.125, 0.99}}}, {"zeta = 1", {{0.5, 0.7}, {0.25, 0.74}}}},
         {{"1/2 + 1/s", 1.0}}};
  const std::string doc = render_svg(p);
  CHECK(well_formed_xml(doc));
  CHECK(doc.find("Coefficient &amp; &lt;limit&gt;") != std::string::npos);
  CHECK(count(doc, "<polyline") == 2);
  CHECK(count(doc, "stroke-dasharray") == 2);
  CHECK(count(doc, ">zeta = ") == 2);

  Plot bad = p;
  bad.series[0].points[0].first = -1.0;
  CHECK_THROWS_AS(render_svg(bad), InvalidArgument);
  Plot empty{"t", "x", "y", false, false, {}, {}};
  CHECK_THROWS_AS(render_svg(empty), InvalidArgument);
  Plot nonfinite{"t", "x", "y", false, false, {{"s", {{1.0, NAN}}}}, {}};
  CHECK_THROWS_AS(render_svg(nonfinite), InvalidArgument);
}

TEST_CASE("CSV tables and verdict lines follow the documented dialect") {
  const fs::path dir = scratch("csv");
  write_csv(Table{"t.csv", {"a", "b"}, {{"1", format_real(0.1)}}}, dir / "t.csv");
  CHECK(slurp(dir / "t.csv") == "a,b\n1,0.10000000000000001\n");
  CHECK_THROWS_AS(write_csv(Table{"t.csv", {"a", "b"}, {{"1"}}}, dir / "t.csv"), InvalidArgument);
  CHECK_THROWS_AS(write_csv(Table{"t.csv", {"a"}, {{"x,y"}}}, dir / "t.csv"), InvalidArgument);

  const Verdict v = make_verdict(4, "final_h1_distance", true, 1e-5, 0.0, 0.05);
  const auto j = nlohmann::json::parse(verdict_json(v));
  CHECK(j["criterion"] == 4);
  CHECK(j["pass"] == true);
  CHECK(j["tolerance"] == 0.05);
  CHECK_THROWS_AS(make_verdict(11, "x", true, 0, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(make_verdict(0, "x", true, 0, 0, 0), InvalidArgument);
}

TEST_CASE("ordered_map keeps index order and rethrows the first failure by index") {
  for (int jobs : {1, 3}) {
    const auto squares = ordered_map(10, jobs, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < squares.size(); ++i) CHECK(squares[i] == static_cast<int>(i * i));
    try {
      ordered_map(6, jobs, [](std::size_t i) -> int {
        if (i == 2 || i == 4) throw std::runtime_error("point " + std::to_string(i));
        return 0;
      });
      FAIL("failure swallowed");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "point 2");
    }
  }
}

TEST_CASE("townes command writes the constants table and passes its verdicts") {
  const fs::path dir = scratch("townes");
  RunConfig c("townes");
  c.set("output-dir", dir.string());
  const ScanReport r = run(c);
  CHECK(r.all_pass());
  const std::string csv = slurp(dir / "townes.csv");
  for (const char* key : {"a_star,", "q6,", "qs_2,", "l2_identity_residual,", "gradient_identity_residual,",
                          "l4_identity_residual,"}) {
    CHECK(csv.find(key) != std::string::npos);
  }
  CHECK(fs::exists(dir / "manifest.cfg"));
  CHECK(well_formed_xml(slurp(dir / "townes_profile.svg")));
  CHECK(lines_of(slurp(dir / "verdicts.jsonl")).size() == r.verdicts.size());
  CHECK(owning_module("townes") == "townes");
  CHECK(owning_module("homog") == "nls");
  CHECK(owning_module("lemma") == "hartree");
}

TEST_CASE("identical configs give bit-identical CSV outputs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const fs::path& dir : {a, b}) {
    RunConfig c("gs");
    c.set("output-dir", dir.string());
    c.set("a", "6");
    c.set("b", "0.2");
    c.set("grid-points", "64");
    c.set("jobs", "2");
    run(c);
  }
  CHECK(slurp(a / "gs.csv") == slurp(b / "gs.csv"));
  CHECK(slurp(a / "gs_profile.csv") == slurp(b / "gs_profile.csv"));
}

TEST_CASE("the binary writes an 8-row collapse table and an SVG") {
  const fs::path dir = scratch("collapse");
  const Invocation r = invoke("collapse --zeta 0 --s 2 --ell-start 0.9 --ell-factor 0.7 --steps 8 "
                              "--output-dir '" + dir.string() + "'");
  CHECK(r.status == 0);
  const auto rows = lines_of(slurp(dir / "collapse.csv"));
  CHECK(rows.size() == 9);
  CHECK(well_formed_xml(slurp(dir / "collapse.svg")));
}

TEST_CASE("the binary rejects a negative zeta citing the hypothesis and ill-typed flags by key") {
  const Invocation neg = invoke("collapse --zeta -1 --output-dir '" + scratch("neg").string() + "'");
  CHECK(neg.status != 0);
  CHECK(neg.output.find("ζ ≥ 0") != std::string::npos);
  CHECK(neg.output.find("nls") != std::string::npos);
  const Invocation typed = invoke("collapse --steps many");
  CHECK(typed.status != 0);
  CHECK(typed.output.find("'steps'") != std::string::npos);
  CHECK(invoke("nonsense").status != 0);
}

TEST_CASE("the binary applies defaults < file < environment < flags") {
  const fs::path dir = scratch("precedence");
  std::ofstream(dir / "p.cfg") << "command = gs\na = 3\nb = 0.3\ngrid-points = 32\nhalf-width = 8\n";
  const Invocation r = invoke("gs --config '" + (dir / "p.cfg").string() + "' --b 0.4 --output-dir '" +
                                  (dir / "out").string() + "'",
                              "CQNLS_B=0.35 CQNLS_A=4");
  REQUIRE(r.status == 0);
  const std::string manifest = slurp(dir / "out" / "manifest.cfg");
  CHECK(manifest.find("\na = 4\n") != std::string::npos);
  CHECK(manifest.find("\nb = 0.4\n") != std::string::npos);
  CHECK(manifest.find("\ngrid-points = 32\n") != std::string::npos);
  CHECK(manifest.find("\ns = 2\n") != std::string::npos);

  // Re-running from the emitted manifest reproduces the table.
  const Invocation again = invoke("gs --config '" + (dir / "out" / "manifest.cfg").string() + "' --output-dir '" +
                                  (dir / "again").string() + "'");
  REQUIRE(again.status == 0);
  CHECK(slurp(dir / "out" / "gs.csv") == slurp(dir / "again" / "gs.csv"));
}
