#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warpnls/geometry.hpp"

// Experiment configuration: flat "key = value" text (# comments), strict
// schema with unknown-key rejection, every default materialized into the
// resolved config so reports can embed the exact run parameters.

namespace warpnls {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // profile
  int n = 4;
  int k = ManifoldProfile::kHyperbolic;  // "inf" in text form
  double sigma = 0.4;
  std::string mode = "nonlinear";  // nonlinear | free

  // grid
  double r_max = 120.0;
  std::size_t m = 16384;

  // time
  double dt = 1e-3;
  double t_final = 40.0;
  double sample_every = 0.5;

  // data
  std::string data_kind = "gaussian";  // gaussian | bump | zero
  double amplitude = 1.0;
  double width = 1.0;
  double center = 2.0;  // bump only

  // diagnostics toggles and knobs
  bool diag_morawetz = true;
  bool diag_virial = true;
  bool diag_defect = true;
  bool diag_profile = true;
  bool diag_phase = false;
  bool diag_longrange = false;
  std::vector<double> defect_times;   // default: dyadic ladder ending at t_final
  std::vector<double> profile_times;  // default: {t_final/2, t_final}
  double rho_min = 0.4;
  double rho_max = 8.0;
  std::size_t rho_points = 400;
  double phase_fit_min = 0.0;  // 0 = t_final/3
  double phase_fit_max = 0.0;  // 0 = t_final
  double longrange_fit_start = 0.0;  // 0 = t_final/4
  double psi_center = 2.0;
  double psi_width = 1.0;

  // solver / limits
  double solver_tol = 1e-10;
  double leak_threshold = 1e-3;
  double xi_max = 0.0;  // 0 = derived from the data bandwidth
  double max_node_steps = 2e10;
  double checkpoint_every = 0.0;  // 0 = no checkpoints
  std::uint64_t seed = 0;         // reserved for randomized data kinds

  std::string output_dir = "out";

  ManifoldProfile profile() const { return {n, k}; }

  /// Parses, applies defaults, validates; throws ConfigError with a
  /// field-level message.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);

  /// Re-validates the invariants (also called by parse).
  void validate() const;

  /// The effective data radius and bandwidth used by the domain-sizing rule.
  double data_extent() const;
  double bandwidth() const;

  /// Every key with its resolved value, in schema order.
  std::vector<std::pair<std::string, std::string>> resolved() const;
};

}  // namespace warpnls
