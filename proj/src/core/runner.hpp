#pragma once

#include <string>

#include "core/config.hpp"

namespace fibermc {

struct RunOutcome {
  int exit_code = 0;    // 0 pass, 1 check failed, 2 config error, 3 low power
  std::string verdict;  // pass | fail | config-error | inconclusive
  std::string json;     // full report document
  std::string summary;  // short human-readable result
  std::string csv;      // tabular payload, when the command produces one
  std::string csv_name;
};

// Runs one command against a resolved config. Commands: check-geometry,
// girsanov, relation, generator-check, simulate. Report files are written
// under cfg.out_dir when it is non-empty.
RunOutcome run_command(const RunConfig& cfg, const std::string& command);

}  // namespace fibermc
