#pragma once

#include <optional>
#include <string>
#include <vector>

#include "warpnls/evolution.hpp"

// Consumers of trajectory snapshots: the Morawetz space-time integral and
// its H1 bound ratio, the virial inequality sides, the scattering defect
// (Cauchy criterion for the backward free flow), the asymptotic profile of
// the free dynamics and its phase constant, and the long-range pairing
// decay exponent.  Everything here is read-only over snapshots.

namespace warpnls {

struct MorawetzSeries {
  std::vector<double> t;
  std::vector<double> cumulative;    // M(T), nondecreasing
  std::vector<double> bound_ratio;   // M(T) / sup_{s<=T} h1(s)^2
  bool saturated = false;            // relative growth over the last quarter small
  double tail_growth = 0.0;          // relative increase of M over the last quarter
  bool n3_flag = false;              // (n-1)(n-3) normalization degenerates at n=3
  std::vector<double> raw_r3;        // comparison series: plain 1/r^3 weight
};

/// Per spec: hyperbolic weight cosh r / sinh^3 r, finite-k weight
/// -Delta^2 a / ((n-1)(n-3)); the 1/r^3 comparison integral always reported.
MorawetzSeries morawetz_accumulate(const Trajectory& traj,
                                   double saturation_fraction = 0.02);

struct VirialReport {
  std::vector<double> t;
  std::vector<double> lhs;          // cumulative left side of the virial inequality
  std::vector<double> rhs;          // C=1 right side: sup_s int |u' u| phi^(n-1)
  std::vector<double> nonlinear;    // cumulative (sigma/(sigma+1)) int |u|^{2s+2} Lap a
  double empirical_constant = 0.0;  // LHS(T)/RHS(T) at the horizon
  double constant_variation = 0.0;  // relative variation of C(T) over the last octave
  bool nonlinear_nonnegative = true;
};

VirialReport virial_check(const Trajectory& traj);

struct DefectResult {
  double t1 = 0.0, t2 = 0.0;
  double defect = 0.0;   // H1 distance of the two back-propagated states
  bool reliable = true;  // false when either snapshot was leak-contaminated
};

/// H1 distance between the free back-propagations (to t = 0) of u(t1), u(t2).
DefectResult scattering_defect(const Trajectory& traj, double t1, double t2);

/// defect(T, 2T) along a dyadic ladder, plus a log-log fitted decay rate.
struct DefectLadder {
  std::vector<DefectResult> pairs;
  std::optional<double> decay_rate;  // slope of -log defect vs log T
};

DefectLadder defect_ladder(const Trajectory& traj, std::vector<double> times);

struct ProfileResult {
  std::vector<double> rho;
  std::vector<double> F;          // |L u0| surrogate at the snapshot time
  double t = 0.0;
  double unitarity_defect = 0.0;  // | ||F||^2 - mass(u0) | / mass(u0)
  bool defect_defined = true;     // false for the zero state
  bool truncated = false;         // rho grid extended past r_max / t
};

/// F(rho) = t^{n/2} (phi(t rho)/(t rho))^{(n-1)/2} |u(t, t rho)|, linearly
/// interpolated from the radial grid.
ProfileResult extract_profile(const Trajectory& traj, double t,
                              std::span<const double> rho_grid);

/// Uniform default rho grid on [0.4, 8].
std::vector<double> default_rho_grid(std::size_t points = 400, double rho_min = 0.4,
                                     double rho_max = 8.0);

struct PhaseFit {
  double lambda = 0.0;       // minus the fitted slope of the reduced phase
  double residual = 0.0;     // rms residual of the linear fit
  double rho_probe = 0.0;
  double dist_half = 0.0;    // |lambda - (n-1)/2|
  double dist_quarter = 0.0; // |lambda - (n-1)^2/4|
};

/// Removes exp(i r^2/(4t)) at r = t rho_probe and regresses the remaining
/// phase against t over the snapshots in [t_fit_min, t_fit_max].  The probe
/// is the profile maximum at the final snapshot unless given.
PhaseFit fit_asymptotic_phase(const Trajectory& traj, double t_fit_min,
                              double t_fit_max,
                              std::optional<double> rho_probe = std::nullopt);

struct LongRangeResult {
  std::vector<double> t;
  std::vector<double> pairing;      // D(t) = |<U0(t) psi, |u|^2s u(t)>|
  std::optional<double> beta_fit;   // decay exponent; nullopt = UNDETERMINED
  double fit_residual = 0.0;
  double predicted = 0.0;           // N sigma
  bool undetermined = false;        // D below the noise floor on the window
  bool short_range = false;         // beta_fit > 1
};

/// psi is a radial bump (default support [1, 3]) free-evolved with the same
/// integrator; the pairing decay exponent is fitted on [fit_start, horizon].
LongRangeResult longrange_indicator(const Trajectory& traj, double fit_start,
                                    double psi_center = 2.0, double psi_width = 1.0);

// small shared helper: least squares fit y = a x + b, returns (a, rms residual)
std::pair<double, double> linear_fit(std::span<const double> x,
                                     std::span<const double> y);

}  // namespace warpnls
