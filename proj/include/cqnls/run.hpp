#pragma once

#include <string>

#include "cqnls/config.hpp"
#include "cqnls/report.hpp"

namespace cqnls {

/// Library module that owns a command, used to label downstream errors.
std::string owning_module(const std::string& command);

/// Runs one command and writes its CSV tables, SVG plots, manifest.cfg and verdicts.jsonl into
/// the configured output directory.
ScanReport run(const RunConfig& config);

}  // namespace cqnls
