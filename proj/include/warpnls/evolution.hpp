#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "warpnls/grid.hpp"

// Time integration of the reduced half-line equation
//
//   i dw/dt = H w + phi^{-(n-1) sigma} |w|^{2 sigma} w,
//   H = -D2 + diag(V_eff),
//
// with Crank-Nicolson for the linear part (a Cayley transform of the real
// symmetric tridiagonal H, hence discretely unitary) and an exact phase
// rotation for the nonlinearity, composed by Strang splitting.  The
// backward free flow solves the forward step's equations in reverse order,
// so free_backpropagate(evolve_free(.)) is the identity to solver roundoff.

namespace warpnls {

enum class EvolveMode { kNonlinear, kFree };

struct IntegratorOptions {
  double dt = 1e-3;
  bool nonlinear = false;
  double sigma = 0.0;
  double solver_tol = 1e-10;      // residual tolerance of the tridiagonal solve
  double leak_threshold = 1e-3;   // max mass fraction in r in [0.9 r_max, r_max]
};

/// Thrown when the boundary-leak monitor trips.
struct DomainTooSmallError : std::runtime_error {
  double t_abort;
  double leak;
  DomainTooSmallError(double t, double frac)
      : std::runtime_error("DOMAIN_TOO_SMALL: boundary mass fraction " +
                           std::to_string(frac) + " at t=" + std::to_string(t)),
        t_abort(t), leak(frac) {}
};

/// Thrown on tridiagonal solver breakdown (residual above tolerance).
struct SolverBreakdownError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Integrator {
public:
  Integrator(GridPtr grid, IntegratorOptions opts);

  const IntegratorOptions& options() const { return opts_; }
  const GridPtr& grid() const { return grid_; }

  /// One Crank-Nicolson step of the linear flow (dt of the integrator,
  /// negated if backward).  Mass-preserving to solver tolerance.
  void linear_step(FieldState& state, bool backward = false) const;

  /// Exact nonlinear phase rotation over dt: modulus-preserving pointwise.
  void nonlinear_step(FieldState& state, double dt) const;

  /// Strang step: half nonlinear, full linear, half nonlinear (or pure CN
  /// when the integrator is linear).
  void step(FieldState& state) const;

  /// Several Strang steps; interior half-phases are merged into full phases
  /// (exact, the phase substep is an exact flow).
  void run_steps(FieldState& state, long steps) const;

  /// Mass fraction currently sitting in r in [0.9 r_max, r_max].
  double boundary_leak(const FieldState& state) const;

private:
  struct CayleyOperator;  // one factorized (I + i dt/2 H) direction

  GridPtr grid_;
  IntegratorOptions opts_;
  std::vector<double> diag_;   // 2/h^2 + V_eff
  double off_;                 // -1/h^2
  std::vector<double> gauge_;  // phi^{-(n-1) sigma}, nonlinear mode only
  std::shared_ptr<const CayleyOperator> forward_, backward_;
};

/// One stored snapshot of a trajectory.
struct Snapshot {
  double t;
  std::vector<Complex> w;
  double leak;
};

struct Trajectory {
  GridPtr grid;
  IntegratorOptions opts;
  EvolveMode mode = EvolveMode::kFree;
  std::vector<Snapshot> snapshots;  // at multiples of sample_every, plus t = 0

  const Snapshot& at_time(double t) const;
  FieldState state_at(double t) const;
};

/// Advances `state` to t_final, sampling every `sample_every` (which dt must
/// divide).  The boundary-leak monitor runs at every sample and throws
/// DomainTooSmallError beyond the threshold.  An optional per-sample callback
/// sees each snapshot as it is produced.
Trajectory evolve(FieldState state, double t_final, EvolveMode mode,
                  const IntegratorOptions& opts, double sample_every,
                  const std::function<void(const Snapshot&)>& on_sample = {});

/// Free Cayley flow applied backward from state.t to t0 (exact algebraic
/// inverse of the forward free steps).
FieldState free_backpropagate(const FieldState& state, double t0,
                              const IntegratorOptions& opts);

}  // namespace warpnls
