#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plap/asymptotics.hpp"
#include "plap/config.hpp"

namespace plap {

inline constexpr const char* kToolVersion = "0.1.0";

struct CheckRecord {
  std::string group;  // entry of kCheckNames
  BoundCheck check;
  double q = kNaN;  // NaN for checks not tied to one q
};

struct RunManifest {
  std::string version = kToolVersion;
  std::string config_hash;
  std::vector<std::pair<std::string, double>> timing;  // seconds per stage
  std::vector<std::string> files;                      // relative to the output dir
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, std::string>> skipped;  // check group, reason
  bool checks_passed = true;
  bool solves_converged = true;

  int exit_code() const { return checks_passed && solves_converged ? 0 : 1; }
};

/// Runs the full experiment: eigenpair, torsion, q sweep, theta, derivative
/// and rate fits, enabled checks; writes sweep.csv, eigenfunction.csv,
/// torsion.csv, solutions/u_q<q>.csv, the SVG plots and report.json into
/// cfg.output_dir. `threads` caps the concurrent q solves (0: config value).
RunManifest run(const ExperimentConfig& cfg, const std::string& config_text, int threads = 0);

/// Loads `config_path` and runs it; `out_dir` overrides [output] dir.
RunManifest run_file(const std::string& config_path, const std::optional<std::string>& out_dir = std::nullopt,
                     int threads = 0);

}  // namespace plap
