#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "plap/domain_mesh.hpp"
#include "plap/solvers.hpp"

namespace plap {

/// Names accepted in `[output] checks`.
inline const std::vector<std::string> kCheckNames = {"bounds", "linfty", "theta", "derivative", "rate"};

/// Parsed experiment file.
///
///   [domain]   kind = "interval" | "rectangle" | "radial_ball", a, b, lx, ly,
///              radius, dimension, n
///   [problem]  p, lambda = <number> | "resonant", q_grid = [...], s = <number> | "inf"
///   [solver]   tol, max_iter, eps_reg, threads
///   [output]   dir, checks = [...]
struct ExperimentConfig {
  DomainSpec domain = DomainSpec::interval(0.0, 1.0, 1024);
  double p = 2.0;
  std::optional<double> lambda;  // empty: resonant
  std::vector<double> q_grid;    // empty: default grid
  double s = std::numeric_limits<double>::infinity();
  SolverConfig solver;
  int threads = 0;
  std::string output_dir = "out";
  std::vector<std::string> checks = kCheckNames;

  bool resonant() const { return !lambda.has_value(); }
  bool check_enabled(const std::string& name) const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64-bit hash, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace plap
