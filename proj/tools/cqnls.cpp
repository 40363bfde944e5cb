#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cqnls/config.hpp"
#include "cqnls/errors.hpp"
#include "cqnls/run.hpp"

namespace {

// Exit statuses; 0 means every verdict passed.
constexpr int kVerdictFailed = 1;
constexpr int kConfigInvalid = 2;
constexpr int kSolverFailed = 3;

const std::map<std::string, std::string> kDescriptions{
    {"townes", "shoot the Townes profile and tabulate a*, Q6 and Q_s"},
    {"gs", "minimize the NLS energy for one (a, b, s)"},
    {"phase", "classify existence over a grid of (a, b)"},
    {"collapse", "trapped NLS collapse along a blow-up length schedule"},
    {"homog", "homogeneous NLS collapse and the b scaling identity"},
    {"hartree", "Hartree ground-state energies against their NLS limit over N"},
    {"lemma", "two- and three-body kernel defects over N"},
    {"hartree-collapse", "Hartree collapse, trapped or homogeneous"},
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Ground states and collapse of the trapped cubic-quintic NLS and its Hartree approximation"};
  cli.require_subcommand(1);

  std::map<std::string, Subcommand> subs;
  for (const auto& name : cqnls::command_names()) {
    Subcommand& sub = subs[name];
    sub.app = cli.add_subcommand(name, kDescriptions.at(name));
    sub.app->add_option("--config", sub.config_file, "key = value file applied before environment and flags");
    for (const auto& key : cqnls::command_keys(name)) {
      sub.app->add_option("--" + key.key, sub.flags[key.key], key.help + " (default " + key.default_value + ")");
    }
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : kConfigInvalid;
  }

  for (auto& [name, sub] : subs) {
    if (!sub.app->parsed()) continue;
    std::optional<cqnls::RunConfig> config;
    try {
      config.emplace(name);
      if (!sub.config_file.empty()) config->merge_file(sub.config_file);
      config->merge_environment();
      for (const auto& [key, value] : sub.flags) {
        if (sub.app->count("--" + key) > 0) config->set(key, value);
      }
    } catch (const cqnls::Error& e) {
      std::cerr << "cqnls " << name << ": config error: " << e.what() << '\n';
      return kConfigInvalid;
    }

    try {
      const cqnls::ScanReport report = cqnls::run(*config);
      for (const auto& v : report.verdicts) {
        std::printf("criterion %d %-34s %s measured=%.10g expected=%.10g tol=%.3g\n", v.criterion, v.check.c_str(),
                    v.pass ? "PASS" : "FAIL", v.measured, v.expected, v.tolerance);
      }
      for (const auto& f : report.files) std::printf("wrote %s\n", f.string().c_str());
      return report.all_pass() ? 0 : kVerdictFailed;
    } catch (const cqnls::ConfigError& e) {
      std::cerr << "cqnls " << name << ": config error: " << e.what() << '\n';
      return kConfigInvalid;
    } catch (const std::exception& e) {
      std::cerr << "cqnls " << name << ": " << cqnls::owning_module(name) << " error: " << e.what() << '\n';
      return kSolverFailed;
    }
  }
  return kConfigInvalid;
}
