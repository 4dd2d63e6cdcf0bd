#include "warpnls/evolution.hpp"

#include <algorithm>
#include <cmath>

namespace warpnls {

namespace {

double max_norm(std::span<const Complex> v) {
  double best = 0.0;
  for (const Complex& z : v) best = std::max(best, std::norm(z));
  return best;
}

// b = (1 + nu d) w + nu off (w shifted both ways)
void apply_shifted(std::span<const double> diag, double off, Complex nu,
                   std::span<const Complex> w, std::span<Complex> b) {
  const std::size_t m = diag.size();
  const Complex no = nu * off;
  for (std::size_t i = 0; i < m; ++i) b[i] = (1.0 + nu * diag[i]) * w[i];
  for (std::size_t i = 0; i + 1 < m; ++i) b[i] += no * w[i + 1];
  for (std::size_t i = 1; i < m; ++i) b[i] += no * w[i - 1];
}

}  // namespace

// One Cayley half (I + mu H) with its Thomas factorization precomputed; the
// matrix is constant across steps, so every step is two substitution sweeps
// with no divisions.  Strict diagonal dominance (V_eff >= 0) keeps the
// unpivoted factorization stable.
struct Integrator::CayleyOperator {
  Complex mu;
  Complex mo;                    // mu * off
  std::vector<Complex> inv_piv;  // 1 / pivot
  std::vector<Complex> upper;    // mo / pivot of the previous row

  CayleyOperator() = default;
  CayleyOperator(std::span<const double> diag, double off, Complex mu_in) {
    mu = mu_in;
    mo = mu * off;
    const std::size_t m = diag.size();
    inv_piv.resize(m);
    upper.resize(m);
    Complex piv = 1.0 + mu * diag[0];
    inv_piv[0] = 1.0 / piv;
    for (std::size_t i = 1; i < m; ++i) {
      upper[i] = mo * inv_piv[i - 1];
      piv = (1.0 + mu * diag[i]) - mo * upper[i];
      inv_piv[i] = 1.0 / piv;
    }
  }

  void solve(std::span<const Complex> b, std::span<Complex> x) const {
    const std::size_t m = b.size();
    x[0] = b[0] * inv_piv[0];
    for (std::size_t i = 1; i < m; ++i) x[i] = (b[i] - mo * x[i - 1]) * inv_piv[i];
    for (std::size_t i = m - 1; i-- > 0;) x[i] -= upper[i + 1] * x[i + 1];
  }
};

Integrator::Integrator(GridPtr grid, IntegratorOptions opts)
    : grid_(std::move(grid)), opts_(opts) {
  if (!(opts_.dt > 0.0)) throw std::invalid_argument("Integrator: dt must be > 0");
  if (opts_.nonlinear && !(opts_.sigma > 0.0))
    throw std::invalid_argument("Integrator: nonlinear mode needs sigma > 0");
  const double h = grid_->h();
  off_ = -1.0 / (h * h);
  diag_.resize(grid_->m());
  for (std::size_t i = 0; i < grid_->m(); ++i)
    diag_[i] = 2.0 / (h * h) + grid_->v_eff()[i];
  const Complex mu(0.0, opts_.dt / 2.0);
  forward_ = std::make_shared<CayleyOperator>(diag_, off_, mu);
  backward_ = std::make_shared<CayleyOperator>(diag_, off_, -mu);
  if (opts_.nonlinear) {
    // phase amplitude |u|^{2 sigma} = |w|^{2 sigma} gauge_i with
    // gauge_i = phi_i^{-(n-1) sigma}, kept as a bounded exponential
    gauge_.resize(grid_->m());
    const double c = -(grid_->profile().n() - 1) * opts_.sigma;
    for (std::size_t i = 0; i < grid_->m(); ++i)
      gauge_[i] = std::exp(c * grid_->log_phi()[i]);
  }
}

void Integrator::linear_step(FieldState& state, bool backward) const {
  const std::size_t m = state.size();
  const CayleyOperator& op = backward ? *backward_ : *forward_;
  const CayleyOperator& adj = backward ? *forward_ : *backward_;

  static thread_local std::vector<Complex> b, next, resid;
  b.resize(m);
  next.resize(m);

  // (I + mu H) w' = (I - mu H) w; the right side reuses the adjoint mu
  apply_shifted(diag_, off_, adj.mu, state.w, b);
  op.solve(b, next);

  // residual || (I + mu H) w' - b ||_inf relative to || b ||_inf
  resid.resize(m);
  apply_shifted(diag_, off_, op.mu, next, resid);
  for (std::size_t i = 0; i < m; ++i) resid[i] -= b[i];
  double rel2 = max_norm(resid) / std::max(max_norm(b), 1e-300);
  if (!(rel2 <= opts_.solver_tol * opts_.solver_tol) || !std::isfinite(rel2))
    throw SolverBreakdownError("tridiagonal solve residual " + std::to_string(std::sqrt(rel2)) +
                               " at t=" + std::to_string(state.t) +
                               " (tol " + std::to_string(opts_.solver_tol) + ")");

  std::swap(state.w, next);
  state.t += backward ? -opts_.dt : opts_.dt;
}

void Integrator::nonlinear_step(FieldState& state, double dt) const {
  const double sigma = opts_.sigma;
  if (gauge_.empty())
    throw std::logic_error("nonlinear_step: integrator built without nonlinearity");
  for (std::size_t i = 0; i < state.size(); ++i) {
    double n2 = std::norm(state.w[i]);
    if (n2 == 0.0) continue;
    double amp = std::pow(n2, sigma) * gauge_[i];
    state.w[i] *= std::polar(1.0, -dt * amp);
  }
  // the clock is advanced by the linear substep
}

void Integrator::step(FieldState& state) const {
  if (!opts_.nonlinear) {
    linear_step(state);
    return;
  }
  nonlinear_step(state, opts_.dt / 2.0);
  linear_step(state);
  nonlinear_step(state, opts_.dt / 2.0);
}

void Integrator::run_steps(FieldState& state, long steps) const {
  if (steps <= 0) return;
  if (!opts_.nonlinear) {
    for (long j = 0; j < steps; ++j) linear_step(state);
    return;
  }
  // Strang block: interior half-phases merge into full phases exactly (the
  // phase substep is an exact flow, additive in dt at frozen modulus)
  nonlinear_step(state, opts_.dt / 2.0);
  linear_step(state);
  for (long j = 1; j < steps; ++j) {
    nonlinear_step(state, opts_.dt);
    linear_step(state);
  }
  nonlinear_step(state, opts_.dt / 2.0);
}

double Integrator::boundary_leak(const FieldState& state) const {
  const auto& g = *grid_;
  double total = 0.0, tail = 0.0;
  const double edge = 0.9 * g.r_max();
  for (std::size_t i = 0; i < state.size(); ++i) {
    double p = std::norm(state.w[i]);
    total += p;
    if (g.nodes()[i] >= edge) tail += p;
  }
  return (total > 0.0) ? tail / total : 0.0;
}

const Snapshot& Trajectory::at_time(double t) const {
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) < 1e-9) return s;
  throw std::out_of_range("Trajectory::at_time: no snapshot at t=" + std::to_string(t));
}

FieldState Trajectory::state_at(double t) const {
  const Snapshot& s = at_time(t);
  FieldState st;
  st.t = s.t;
  st.w = s.w;
  st.grid = grid;
  return st;
}

Trajectory evolve(FieldState state, double t_final, EvolveMode mode,
                  const IntegratorOptions& opts, double sample_every,
                  const std::function<void(const Snapshot&)>& on_sample) {
  if (!(t_final > state.t)) throw std::invalid_argument("evolve: t_final must exceed state.t");
  if (!(sample_every > 0.0)) throw std::invalid_argument("evolve: sample_every must be > 0");
  const double steps_per_sample_d = sample_every / opts.dt;
  const auto steps_per_sample = static_cast<long>(std::lround(steps_per_sample_d));
  if (steps_per_sample < 1 ||
      std::abs(steps_per_sample_d - static_cast<double>(steps_per_sample)) > 1e-9)
    throw std::invalid_argument("evolve: dt must divide sample_every");

  IntegratorOptions run_opts = opts;
  run_opts.nonlinear = (mode == EvolveMode::kNonlinear);
  Integrator integ(state.grid, run_opts);

  Trajectory traj;
  traj.grid = state.grid;
  traj.opts = run_opts;
  traj.mode = mode;

  auto record = [&](const FieldState& st) {
    Snapshot snap{st.t, st.w, integ.boundary_leak(st)};
    if (snap.leak > run_opts.leak_threshold)
      throw DomainTooSmallError(st.t, snap.leak);
    if (on_sample) on_sample(snap);
    traj.snapshots.push_back(std::move(snap));
  };

  record(state);
  const double t0 = state.t;
  const auto total_samples =
      static_cast<long>(std::lround((t_final - t0) / sample_every));
  for (long s = 1; s <= total_samples; ++s) {
    integ.run_steps(state, steps_per_sample);
    state.t = t0 + static_cast<double>(s) * sample_every;  // keep the clock exact
    record(state);
  }
  return traj;
}

FieldState free_backpropagate(const FieldState& state, double t0,
                              const IntegratorOptions& opts) {
  if (state.t < t0)
    throw std::invalid_argument("free_backpropagate: state is earlier than t0");
  IntegratorOptions run_opts = opts;
  run_opts.nonlinear = false;
  Integrator integ(state.grid, run_opts);
  FieldState out = state;
  const auto steps = static_cast<long>(std::lround((state.t - t0) / opts.dt));
  if (std::abs((state.t - t0) - static_cast<double>(steps) * opts.dt) > 1e-9)
    throw std::invalid_argument("free_backpropagate: dt must divide the time span");
  for (long j = 0; j < steps; ++j) integ.linear_step(out, /*backward=*/true);
  out.t = t0;
  return out;
}

}  // namespace warpnls
