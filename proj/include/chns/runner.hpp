/// @file runner.hpp
/// @brief Subcommand runner behind the chns executable.
///
/// Each run writes manifest.json (config hash, seed, versions, wall time,
/// status, metrics) and the subcommand's CSV files into the output directory.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "chns/config.hpp"

namespace chns {

enum ExitCode : int { kExitPass = 0, kExitAudit = 2, kExitSolver = 3, kExitConfig = 4 };

struct RunResult {
  int code = kExitPass;
  std::string status = "pass";  // pass | audit_failure | solver_failure | config_error
  std::string reason;           // empty on pass
  std::map<std::string, double> metrics;

  /// "status=<status> code=<n> reason=<reason>" on one line.
  std::string line() const;
};

/// Subcommands: simulate, energycheck, gradcheck, optimize, continue.
RunResult run_command(const std::string& sub, const RunConfig& cfg, const std::filesystem::path& out);

/// Loads the config first; config errors map to kExitConfig.
RunResult run_command(const std::string& sub, const std::filesystem::path& config_path,
                      const std::filesystem::path& out);

}  // namespace chns
