#pragma once

#include <string>
#include <vector>

#include "warpnls/config.hpp"
#include "warpnls/diagnostics.hpp"
#include "warpnls/exponents.hpp"

// Orchestration: single experiment runs (report JSON + fixed-schema CSV +
// checkpoints), (n, k, sigma) sweeps over a bounded worker pool, and the
// geometry verification certificate.

namespace warpnls {

// process exit codes used by the CLI
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitLeakAbort = 3;
inline constexpr int kExitNumericalFatal = 4;

struct RunResult {
  int exit_code = kExitOk;
  std::string error;
  std::vector<std::string> flags;          // informational
  std::vector<std::string> violations;     // invariant violations (exit != 0)
  // headline scalars for sweeps
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  std::optional<double> defect_rate;
  std::optional<double> beta_fit;
  std::optional<double> lambda_fit;
  bool morawetz_saturated = false;
  double empirical_constant = 0.0;
  double final_leak = 0.0;
};

/// Executes the configured experiment and writes report.json, series.csv,
/// profile CSVs and checkpoints under out_dir.  Never throws for run-level
/// failures; the outcome is in the result.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepSpec {
  std::vector<int> ns;
  std::vector<int> ks;  // kHyperbolic allowed
  std::vector<double> sigmas;
  ExperimentConfig base;  // template for every point

  static SweepSpec parse_file(const std::string& path);
  static SweepSpec parse(const std::string& text);
};

struct SweepRow {
  int n;
  int k;
  double sigma;
  std::string feasibility;  // exponents-module verdict
  RunResult run;
};

/// Runs every (n, k, sigma) point independently on `workers` threads and
/// writes summary.csv (sorted by n, k, sigma) under out_dir.  Per-point
/// failures are recorded; the sweep fails only if every point fails.
int run_sweep(const SweepSpec& spec, const std::string& out_dir, int workers);

struct GeometryVerifySpec {
  std::vector<int> ns = {4, 5, 6, 7, 8};
  std::vector<int> ks = {1, 2, 3, 4, 5, 6};
  std::size_t r_points = 200;
  double r_min = 1e-3;
  double r_max = 50.0;
};

struct GeometryVerifyOutcome {
  bool certificates_pass = true;       // positivity checks (a)-(d)
  bool zero_constants_pass = true;     // (n-1)(n-3) at the small-r end, 1%
  bool infinity_constants_pass = true; // extrapolated large-r constant, 1%
  std::vector<std::string> failures;
  // raw large-r data, one row per (n,k): value of r^3 (-Lap^2 a) at r_max
  // and its Richardson extrapolation in 1/r^2 from the two largest radii
  struct LimitRow {
    int n, k;
    double limit;          // (n-1)(2k+1)(2k(n-1)+n-3)
    double at_rmax;        // raw value at the largest grid radius
    double extrapolated;   // 1/r^2-extrapolated estimate of the limit
    double zero_constant;  // r^3 (-Lap^2 a) at the smallest radius
  };
  std::vector<LimitRow> rows;
};

/// Drives positivity_certificate plus the asymptotic-constant checks over
/// the grid and writes certificate JSON; exit status nonzero on any failure.
GeometryVerifyOutcome verify_geometry(const GeometryVerifySpec& spec,
                                      const std::string& out_path);

/// Log-spaced grid helper.
std::vector<double> log_spaced(double lo, double hi, std::size_t points);

}  // namespace warpnls
