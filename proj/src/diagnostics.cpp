#include "warpnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace warpnls {

namespace {

double interp(std::span<const double> xs, std::span<const double> ys, double x) {
  // xs uniform ascending; clamps to 0 outside
  if (xs.empty() || x < xs.front()) {
    // linear from (0, 0) to the first node
    if (!xs.empty() && x >= 0.0 && xs.front() > 0.0) return ys.front() * (x / xs.front());
    return 0.0;
  }
  if (x > xs.back()) return 0.0;
  double step = xs[1] - xs[0];
  auto i = static_cast<std::size_t>((x - xs.front()) / step);
  if (i + 1 >= xs.size()) return ys.back();
  double lam = (x - xs[i]) / step;
  return ys[i] * (1.0 - lam) + ys[i + 1] * lam;
}

// cosh r / sinh^3 r, log form at large r
double cosh_over_sinh3(double r) {
  if (r > 30.0) {
    double ls = r - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * r));
    double lc = r - std::numbers::ln2 + std::log1p(std::exp(-2.0 * r));
    return std::exp(lc - 3.0 * ls);
  }
  double sh = std::sinh(r);
  return std::cosh(r) / (sh * sh * sh);
}

FieldState snapshot_state(const Trajectory& traj, const Snapshot& s) {
  FieldState st;
  st.t = s.t;
  st.w = s.w;
  st.grid = traj.grid;
  return st;
}

}  // namespace

std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  double a = (n * sxy - sx * sy) / denom;
  double b = (sy - a * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y[i] - (a * x[i] + b);
    ss += e * e;
  }
  return {a, std::sqrt(ss / n)};
}

MorawetzSeries morawetz_accumulate(const Trajectory& traj, double saturation_fraction) {
  const auto& g = *traj.grid;
  const int n = g.profile().n();
  MorawetzSeries out;
  out.n3_flag = (n == 3);

  // pointwise weights; |u|^2 phi^(n-1) == |w|^2, so the spatial sum is in w
  const std::size_t m = g.m();
  std::vector<double> weight(m), r3w(m);
  for (std::size_t i = 0; i < m; ++i) {
    double r = g.nodes()[i];
    if (g.profile().is_hyperbolic())
      weight[i] = cosh_over_sinh3(r);
    else if (n != 3)
      weight[i] = g.morawetz_w()[i] / ((n - 1.0) * (n - 3.0));
    else
      weight[i] = 1.0 / (r * r * r);
    r3w[i] = 1.0 / (r * r * r);
  }

  auto spatial = [&](const Snapshot& s, std::span<const double> wgt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += wgt[i] * std::norm(s.w[i]);
    return acc * g.h() * g.sphere();
  };

  double M = 0.0, Mr3 = 0.0, h1sup2 = 0.0;
  double prev_val = 0.0, prev_r3 = 0.0, prev_t = 0.0;
  bool first = true;
  for (const auto& s : traj.snapshots) {
    double v = spatial(s, weight);
    double v3 = spatial(s, r3w);
    double h1 = h1_norm(snapshot_state(traj, s));
    h1sup2 = std::max(h1sup2, h1 * h1);
    if (!first) {
      double dt = s.t - prev_t;
      M += 0.5 * (v + prev_val) * dt;
      Mr3 += 0.5 * (v3 + prev_r3) * dt;
    }
    first = false;
    prev_val = v;
    prev_r3 = v3;
    prev_t = s.t;
    out.t.push_back(s.t);
    out.cumulative.push_back(M);
    out.raw_r3.push_back(Mr3);
    out.bound_ratio.push_back(h1sup2 > 0.0 ? M / h1sup2 : 0.0);
  }

  if (out.t.size() >= 4 && out.cumulative.back() > 0.0) {
    double T = out.t.back();
    double tq = out.t.front() + 0.75 * (T - out.t.front());
    double Mq = out.cumulative.back();
    for (std::size_t i = 0; i < out.t.size(); ++i)
      if (out.t[i] >= tq) {
        Mq = out.cumulative[i];
        break;
      }
    out.tail_growth = (out.cumulative.back() - Mq) / out.cumulative.back();
    out.saturated = out.tail_growth < saturation_fraction;
  }
  return out;
}

VirialReport virial_check(const Trajectory& traj) {
  const auto& g = *traj.grid;
  const std::size_t m = g.m();
  const double sigma = traj.opts.sigma;
  const double beta = (g.profile().n() - 1) / 2.0;
  const bool nonlinear = traj.mode == EvolveMode::kNonlinear && sigma > 0.0;

  std::vector<double> lap(m);
  for (std::size_t i = 0; i < m; ++i)
    lap[i] = morawetz_weights(g.profile(), g.nodes()[i]).lap_a;

  VirialReport out;
  double lhs = 0.0, nl_cum = 0.0, rhs_sup = 0.0;
  double prev_int = 0.0, prev_nl = 0.0, prev_t = 0.0;
  bool first = true;
  for (const auto& s : traj.snapshots) {
    FieldState st = snapshot_state(traj, s);
    // (-Delta^2 a) |u|^2 / 2 against the measure: morawetz_w |w|^2 / 2
    double quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) quad += g.morawetz_w()[i] * std::norm(s.w[i]);
    quad *= 0.5 * g.h() * g.sphere();
    // nonlinear contribution (sigma/(sigma+1)) |u|^{2s+2} Lap a
    double nl = 0.0;
    if (nonlinear) {
      for (std::size_t i = 0; i < m; ++i) {
        double aw = std::abs(s.w[i]);
        if (aw == 0.0) continue;
        double u2s = std::exp(2.0 * sigma * (std::log(aw) - beta * g.log_phi()[i]));
        nl += lap[i] * aw * aw * u2s;
      }
      nl *= sigma / (sigma + 1.0) * g.h() * g.sphere();
      if (nl < 0.0) out.nonlinear_nonnegative = false;
    }
    // right side with |grad a| = 1: int |u_r| |u| phi^(n-1)
    auto gw = scaled_gradient(st);
    double rhs = 0.0;
    for (std::size_t i = 0; i < m; ++i) rhs += std::abs(gw[i]) * std::abs(s.w[i]);
    rhs *= g.h() * g.sphere();
    rhs_sup = std::max(rhs_sup, rhs);

    if (!first) {
      double dt = s.t - prev_t;
      lhs += 0.5 * (quad + nl + prev_int) * dt;
      nl_cum += 0.5 * (nl + prev_nl) * dt;
    }
    first = false;
    prev_int = quad + nl;
    prev_nl = nl;
    prev_t = s.t;
    out.t.push_back(s.t);
    out.lhs.push_back(lhs);
    out.nonlinear.push_back(nl_cum);
    out.rhs.push_back(rhs_sup);
  }
  if (!out.t.empty() && rhs_sup > 0.0) {
    out.empirical_constant = out.lhs.back() / rhs_sup;
    // variation of C(T) over the final octave
    double T = out.t.back();
    double cmin = out.empirical_constant, cmax = out.empirical_constant;
    for (std::size_t i = 0; i < out.t.size(); ++i) {
      if (out.t[i] < T / 2.0 || out.rhs[i] <= 0.0) continue;
      double c = out.lhs[i] / out.rhs[i];
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    out.constant_variation = (cmax - cmin) / std::max(cmax, 1e-300);
  }
  return out;
}

DefectResult scattering_defect(const Trajectory& traj, double t1, double t2) {
  if (!(t2 >= t1) || t1 < 0.0)
    throw std::invalid_argument("scattering_defect: need 0 <= t1 <= t2");
  const Snapshot& s1 = traj.at_time(t1);
  const Snapshot& s2 = traj.at_time(t2);
  if (t1 == t2) return {t1, t2, 0.0, s1.leak <= 0.5 * traj.opts.leak_threshold};

  FieldState b1 = free_backpropagate(snapshot_state(traj, s1), 0.0, traj.opts);
  FieldState b2 = free_backpropagate(snapshot_state(traj, s2), 0.0, traj.opts);
  FieldState diff = b1;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.w[i] -= b2.w[i];

  DefectResult out;
  out.t1 = t1;
  out.t2 = t2;
  out.defect = h1_norm(diff);
  out.reliable = s1.leak <= 0.5 * traj.opts.leak_threshold &&
                 s2.leak <= 0.5 * traj.opts.leak_threshold;
  return out;
}

DefectLadder defect_ladder(const Trajectory& traj, std::vector<double> times) {
  DefectLadder out;
  std::sort(times.begin(), times.end());
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    out.pairs.push_back(scattering_defect(traj, times[i], times[i + 1]));
  if (out.pairs.size() >= 2) {
    std::vector<double> lx, ly;
    for (const auto& p : out.pairs)
      if (p.defect > 0.0) {
        lx.push_back(std::log(p.t1));
        ly.push_back(std::log(p.defect));
      }
    if (lx.size() >= 2) out.decay_rate = -linear_fit(lx, ly).first;
  }
  return out;
}

std::vector<double> default_rho_grid(std::size_t points, double rho_min, double rho_max) {
  std::vector<double> rho(points);
  for (std::size_t i = 0; i < points; ++i)
    rho[i] = rho_min + (rho_max - rho_min) * static_cast<double>(i) /
                           static_cast<double>(points - 1);
  return rho;
}

ProfileResult extract_profile(const Trajectory& traj, double t,
                              std::span<const double> rho_grid) {
  const auto& g = *traj.grid;
  const int n = g.profile().n();
  const double beta = (n - 1) / 2.0;
  const Snapshot& s = traj.at_time(t);

  // |u(t, r)| (phi/r)^beta = |w(t, r)| / r^beta: interpolate |w|, divide once
  std::vector<double> abs_w(g.m());
  for (std::size_t i = 0; i < g.m(); ++i) abs_w[i] = std::abs(s.w[i]);

  ProfileResult out;
  out.t = t;
  out.rho.assign(rho_grid.begin(), rho_grid.end());
  out.F.resize(rho_grid.size());
  const double tn2 = std::pow(t, n / 2.0);
  for (std::size_t j = 0; j < rho_grid.size(); ++j) {
    double r = t * rho_grid[j];
    if (r > g.r_max()) {
      out.truncated = true;
      out.F[j] = 0.0;
      continue;
    }
    out.F[j] = tn2 * interp(g.nodes(), abs_w, r) / std::pow(r, beta);
  }

  // || F ||^2_{L^2(rho^{n-1} d rho)} |S^{n-1}| against the conserved mass
  double mass0 = mass(traj.state_at(traj.snapshots.front().t));
  if (mass0 <= 0.0) {
    out.defect_defined = false;
    return out;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < rho_grid.size(); ++j) {
    double wgt = (j == 0 || j + 1 == rho_grid.size()) ? 0.5 : 1.0;
    acc += wgt * out.F[j] * out.F[j] * std::pow(out.rho[j], n - 1);
  }
  double drho = (rho_grid.size() > 1) ? out.rho[1] - out.rho[0] : 0.0;
  double norm2 = acc * drho * g.sphere();
  out.unitarity_defect = std::abs(norm2 - mass0) / mass0;
  return out;
}

PhaseFit fit_asymptotic_phase(const Trajectory& traj, double t_fit_min,
                              double t_fit_max, std::optional<double> rho_probe) {
  const auto& g = *traj.grid;
  std::vector<const Snapshot*> window;
  for (const auto& s : traj.snapshots)
    if (s.t >= t_fit_min - 1e-9 && s.t <= t_fit_max + 1e-9 && s.t > 0.0)
      window.push_back(&s);
  if (window.size() < 8)
    throw std::invalid_argument("fit_asymptotic_phase: need >= 8 snapshots in the window");

  double t_end = window.back()->t;
  double probe;
  if (rho_probe) {
    probe = *rho_probe;
  } else {
    // profile maximum at the final window time, clear of the boundary
    auto rho = default_rho_grid(300, 0.4, 0.9 * g.r_max() / t_end);
    auto prof = extract_profile(traj, t_end, rho);
    std::size_t best = 0;
    for (std::size_t j = 1; j < prof.F.size(); ++j)
      if (prof.F[j] > prof.F[best]) best = j;
    probe = rho[best];
  }

  // interpolate u at r = t probe and strip the quadratic phase
  std::vector<double> ts, phases;
  std::vector<double> re(g.m()), im(g.m());
  for (const Snapshot* s : window) {
    double r = s->t * probe;
    if (r > g.r_max()) break;
    for (std::size_t i = 0; i < g.m(); ++i) {
      re[i] = s->w[i].real();
      im[i] = s->w[i].imag();
    }
    Complex wi(interp(g.nodes(), re, r), interp(g.nodes(), im, r));
    Complex reduced = wi * std::polar(1.0, -r * r / (4.0 * s->t));
    if (std::abs(reduced) == 0.0) continue;
    ts.push_back(s->t);
    phases.push_back(std::arg(reduced));
  }
  if (ts.size() < 8)
    throw std::invalid_argument("fit_asymptotic_phase: probe leaves too few samples");

  // unwrap; a jump at the +-pi ambiguity means the sampling is too coarse
  for (std::size_t j = 1; j < phases.size(); ++j) {
    double d = phases[j] - phases[j - 1];
    double wrapped = std::remainder(d, 2.0 * std::numbers::pi);
    if (std::abs(wrapped) > 0.9 * std::numbers::pi)
      throw std::runtime_error(
          "fit_asymptotic_phase: phase step near pi between samples at t=" +
          std::to_string(ts[j]) + "; shrink the sampling interval");
    phases[j] = phases[j - 1] + wrapped;
  }

  auto [slope, resid] = linear_fit(ts, phases);
  PhaseFit out;
  out.lambda = -slope;
  out.residual = resid;
  out.rho_probe = probe;
  const int n = g.profile().n();
  out.dist_half = std::abs(out.lambda - (n - 1) / 2.0);
  out.dist_quarter = std::abs(out.lambda - (n - 1) * (n - 1) / 4.0);
  return out;
}

LongRangeResult longrange_indicator(const Trajectory& traj, double fit_start,
                                    double psi_center, double psi_width) {
  const auto& g = *traj.grid;
  const double sigma = traj.opts.sigma;
  const double beta = (g.profile().n() - 1) / 2.0;
  if (traj.snapshots.size() < 4)
    throw std::invalid_argument("longrange_indicator: trajectory too short");
  const double horizon = traj.snapshots.back().t;
  if (!(horizon >= 4.0 * fit_start))
    throw std::invalid_argument("longrange_indicator: horizon must be >= 4 x fit_start");

  LongRangeResult out;
  out.predicted = traj.grid->profile().is_hyperbolic()
                      ? std::numeric_limits<double>::infinity()
                      : traj.grid->profile().scattering_dimension() * sigma;

  // free-evolve psi with the same integrator and sampling cadence; psi is a
  // fixed probe, so its own boundary reflections are not grounds to abort
  // (they pair against the decaying nonlinearity), hence no leak gate here
  IntegratorOptions psi_opts = traj.opts;
  psi_opts.leak_threshold = 1.0;
  double sample_every = traj.snapshots[1].t - traj.snapshots[0].t;
  FieldState psi0 = bump_data(traj.grid, 1.0, psi_center, psi_width);
  double mass_ref = mass(traj.state_at(traj.snapshots.front().t));
  const double noise_floor = 1e-12 * std::max(mass_ref, 1e-300);

  std::size_t idx = 0;
  auto pair_with = [&](const Snapshot& psi_s) {
    // skip to the matching u snapshot (same cadence, same times)
    while (idx < traj.snapshots.size() &&
           traj.snapshots[idx].t < psi_s.t - 1e-9)
      ++idx;
    if (idx >= traj.snapshots.size()) return;
    const Snapshot& us = traj.snapshots[idx];
    if (std::abs(us.t - psi_s.t) > 1e-9 || us.t <= 0.0) return;
    // <U0 psi, |u|^2s u> against d Omega: conj(psi_w) |u|^2s w summed
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < g.m(); ++i) {
      double aw = std::abs(us.w[i]);
      if (aw == 0.0 || psi_s.w[i] == Complex(0.0, 0.0)) continue;
      double u2s = std::exp(2.0 * sigma * (std::log(aw) - beta * g.log_phi()[i]));
      acc += std::conj(psi_s.w[i]) * us.w[i] * u2s;
    }
    out.t.push_back(us.t);
    out.pairing.push_back(std::abs(acc) * g.h() * g.sphere());
  };

  evolve(std::move(psi0), horizon, EvolveMode::kFree, psi_opts, sample_every,
         pair_with);

  // fit log D against log t on [fit_start, horizon]
  std::vector<double> lx, ly;
  bool all_below_floor = true;
  for (std::size_t j = 0; j < out.t.size(); ++j) {
    if (out.t[j] < fit_start) continue;
    if (out.pairing[j] > noise_floor) all_below_floor = false;
    if (out.pairing[j] > 0.0) {
      lx.push_back(std::log(out.t[j]));
      ly.push_back(std::log(out.pairing[j]));
    }
  }
  if (all_below_floor || lx.size() < 4) {
    out.undetermined = true;
    out.short_range = true;  // flagged as strongly short-range
    return out;
  }
  auto [slope, resid] = linear_fit(lx, ly);
  out.beta_fit = -slope;
  out.fit_residual = resid;
  out.short_range = *out.beta_fit > 1.0;
  return out;
}

}  // namespace warpnls
