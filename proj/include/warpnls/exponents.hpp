#pragma once

#include <optional>
#include <span>
#include <string>

#include "warpnls/geometry.hpp"

// Solvers for the admissible-pair / weighted-Hoelder exponent systems that
// drive the weighted Strichartz bookkeeping, plus the bootstrap-lemma
// utilities.  The systems are small and linear in the search variables, but
// every strict inequality is certified with an explicit margin: a tuple
// that only grazes a boundary is numerically meaningless downstream.

namespace warpnls {

enum class Feasibility {
  kFeasible,
  kInfeasible,
  kInfeasibleAtTolerance,  // solutions exist but no margin >= 1e-9
};

std::string to_string(Feasibility f);

struct ExponentSolution {
  double alpha = 0.0;
  double p = 0.0;
  double q = 0.0;
  double theta = 0.0;
  std::optional<double> a;  // Sobolev interpolation exponent, M-case only
  double sigma = 0.0;
  int n = 0;
  double N = 0.0;  // scattering dimension (infinite in the hyperbolic case)
  double integrability_margin = 0.0;
  double min_margin = 0.0;  // smallest certified strict-inequality margin
};

struct ExponentResult {
  Feasibility status = Feasibility::kInfeasible;
  std::optional<ExponentSolution> solution;
  std::string detail;  // human-readable infeasibility certificate
  bool feasible() const { return status == Feasibility::kFeasible; }
};

/// Admissibility: 2/p + n/q = n/2 (to 1e-12), p >= 2, (p,q,n) != (2,inf,2).
/// Infinite exponents are passed as std::numeric_limits<double>::infinity().
bool is_admissible(int n, double p, double q);

/// Hyperbolic-space system: largest alpha in (0, 2 sigma) by dyadic
/// bisection (resolution 1e-6) keeping theta in (1, inf), the weight
/// integrability inequality strict, and 2 sigma - alpha > 0.
/// Feasible exactly for 0 < sigma < 2/(n-2).
ExponentResult solve_exponents_hyperbolic(int n, double sigma);

/// M-case system with the extra Sobolev exponent a in [2, 2*] scanned on a
/// 1e-3 grid; feasible iff 2/N < sigma < 2/(n-2).  Among feasible (a, alpha)
/// the solution with the largest integrability margin is returned.
ExponentResult solve_exponents_M(int n, int k, double sigma);

/// Bootstrap lemma: the largest eps1 compatible with (theta, eps2).
double bootstrap_threshold(double theta, double eps2);

struct BootstrapCheck {
  bool hypothesis_holds = false;  // M(t) <= eps1 + eps2 M(t)^theta on samples
  bool seed_ok = false;           // M(0) <= (theta eps2)^{-1/(theta-1)}
  bool threshold_ok = false;      // eps1 below bootstrap_threshold
  bool conclusion_holds = false;  // M(t) <= theta/(theta-1) eps1 on samples
  double worst_conclusion_ratio = 0.0;
};

BootstrapCheck bootstrap_check(std::span<const double> M_series, double eps1,
                               double eps2, double theta);

}  // namespace warpnls
