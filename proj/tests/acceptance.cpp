// Acceptance suite: one check per numbered criterion, each printing a
// single [PASS]/[FAIL] line.  Exit status is the number of failed criteria.
//
// Criterion 1 note: the r -> infinity Morawetz constant is approached like
// L (1 + c/r^2) with c growing ~ k^2, so at the pinned radius r = 50 the
// true mathematical deviation exceeds 1% for every k >= 2 (k=6: -3.9%).
// The check is implemented exactly as stated and therefore fails for those
// (n, k); the Richardson-extrapolated limits, reported alongside, match the
// closed-form constants to < 0.15% for all profiles, which is what the
// implementation can honestly certify at finite radius.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "warpnls/harness.hpp"

using namespace warpnls;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

GridPtr make_grid(int n, int k, double r_max, std::size_t m) {
  return std::make_shared<RadialGrid>(ManifoldProfile(n, k), r_max, m);
}

double l2_dist(const FieldState& a, const FieldState& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a.w[i] - b.w[i]);
  return std::sqrt(acc * a.grid->h() * a.grid->sphere());
}

// ---------------------------------------------------------------------------

void criterion_1_geometry_certificate() {
  Timer timer;
  GeometryVerifySpec spec;  // n in 4..8, k in 1..6, 200 log-spaced r in [1e-3, 50]
  auto grid = log_spaced(spec.r_min, spec.r_max, spec.r_points);

  bool margins_ok = true, zero_ok = true, inf_ok = true;
  std::string worst;
  double worst_dev = 0.0;
  int extrap_fail = 0;
  for (int n : spec.ns) {
    for (int k : spec.ks) {
      ManifoldProfile p(n, k);
      auto cert = positivity_certificate(p, grid);
      margins_ok = margins_ok && cert.all_pass && cert.worst_margin_a > 0 &&
                   cert.worst_margin_b > 0 && cert.worst_margin_c > 0 &&
                   cert.worst_margin_d > 0;
      auto cube = [&](double r) {
        return r * r * r * morawetz_weights(p, r).neg_bilap_a;
      };
      double z = cube(1e-3) / ((n - 1.0) * (n - 3.0)) - 1.0;
      zero_ok = zero_ok && std::abs(z) <= 0.01;
      double limit = (n - 1.0) * (2.0 * k + 1.0) * (2.0 * k * (n - 1.0) + n - 3.0);
      double dev = cube(50.0) / limit - 1.0;
      if (std::abs(dev) > 0.01) {
        inf_ok = false;
        if (std::abs(dev) > std::abs(worst_dev)) {
          worst_dev = dev;
          worst = p.label();
        }
      }
      // extrapolated limit, the honestly attainable form of the same check
      double c0 = cube(grid[grid.size() - 2]), c1 = cube(grid.back());
      double ratio2 = std::pow(grid.back() / grid[grid.size() - 2], 2.0);
      double ext = c1 + (c1 - c0) / (ratio2 - 1.0);
      if (std::abs(ext / limit - 1.0) > 0.01) ++extrap_fail;
    }
  }
  double secs = timer.seconds();
  bool pass = margins_ok && zero_ok && inf_ok && secs < 5.0;
  std::string detail =
      "geometry certificate: positivity margins " + std::string(margins_ok ? "ok" : "FAILED") +
      ", r->0 constants " + (zero_ok ? "ok" : "FAILED") + ", r->inf constants at r=50 " +
      (inf_ok ? "ok" : "off by up to " + fmt(100 * worst_dev) + "% (" + worst +
                           "); mathematical 1/r^2 approach, see note; extrapolated "
                           "limits all within 1%: " +
                           (extrap_fail == 0 ? "yes" : "no")) +
      ", runtime " + fmt(secs) + "s";
  report(1, pass, detail);
}

void criterion_2_exponent_boundary() {
  Timer timer;
  bool ok = true;
  std::string detail;
  const double step = 1e-3;
  for (int n : {4, 5}) {
    for (int k : {1, 2, 3}) {
      double N = (2.0 * k + 1.0) * (n - 1.0) + 1.0;
      double lo = 2.0 / N, hi = 2.0 / (n - 2.0);
      for (double sigma = step; sigma < hi + 0.05; sigma += step) {
        bool feasible = solve_exponents_M(n, k, sigma).feasible();
        bool inside = sigma > lo && sigma < hi;
        // exact match required except within one grid step of either edge
        if (std::abs(sigma - lo) <= step || std::abs(sigma - hi) <= step) continue;
        if (feasible != inside) {
          ok = false;
          detail = "mismatch at n=" + std::to_string(n) + " k=" + std::to_string(k) +
                   " sigma=" + fmt(sigma);
          break;
        }
      }
    }
  }
  double secs = timer.seconds();
  bool pass = ok && secs < 10.0;
  report(2, pass,
         "exponent feasibility boundary (2/N, 2/(n-2)) +- one step, "
         "(n,k) in {4,5}x{1,2,3}, step 1e-3" +
             (ok ? "" : ": " + detail) + ", runtime " + fmt(secs) + "s");
}

void criterion_3_euclidean_oracle() {
  Timer timer;
  const int n = 4;
  auto grid = make_grid(n, 0, 20.0, 8192);
  auto data = gaussian_data(grid, 1.0, 1.0);

  IntegratorOptions opts;
  opts.dt = 1e-3;
  auto traj = evolve(data, 1.0, EvolveMode::kFree, opts, 0.5);
  auto got = traj.state_at(1.0);

  FieldState want;
  want.t = 1.0;
  want.grid = grid;
  want.w.resize(grid->m());
  Complex z(1.0, 2.0);
  for (std::size_t i = 0; i < grid->m(); ++i) {
    double r = grid->nodes()[i];
    want.w[i] = std::pow(z, -2.0) * std::exp(-r * r / (2.0 * z)) * std::pow(r, 1.5);
  }
  double err = l2_dist(got, want);

  // dt self-convergence at the same m against a dt/8 reference
  auto run_dt = [&](double dt) {
    IntegratorOptions o;
    o.dt = dt;
    return evolve(data, 1.0, EvolveMode::kFree, o, 1.0).state_at(1.0);
  };
  auto ref = run_dt(1e-3 / 8.0);
  double e4 = l2_dist(run_dt(4e-3), ref);
  double e2 = l2_dist(run_dt(2e-3), ref);
  double e1 = l2_dist(run_dt(1e-3), ref);
  double r42 = e4 / e2, r21 = e2 / e1;

  double secs = timer.seconds();
  bool pass = err <= 1e-4 && r42 >= 3.5 && r42 <= 4.5 && r21 >= 3.5 && r21 <= 4.5 &&
              secs < 120.0;
  report(3, pass,
         "euclidean gaussian oracle: L2 error " + fmt(err) + " (<= 1e-4) at (8192, 1e-3), "
         "self-convergence ratios " + fmt(r42) + ", " + fmt(r21) +
             " (in [3.5, 4.5]), runtime " + fmt(secs) + "s");
}

struct ConservationRun {
  MorawetzSeries mor;
  double mass_drift = 0.0;
  double energy_drift = 0.0;
  Trajectory traj;
};

ConservationRun conservation_run(int k) {
  // h ~ 5e-3: the discrete energy functional carries an O(h^2) error whose
  // drift along the run must stay under the 1e-4 budget (k=1 is the worse
  // profile: 1.3e-4 at h = 1e-2)
  const int n = 4;
  const double sigma = 0.5;
  auto grid = make_grid(n, k, 320.0, 65536);
  auto data = gaussian_data(grid, 1.0, 1.0);
  double m0 = mass(data), e0 = energy(data, sigma);

  IntegratorOptions opts;
  opts.dt = 1e-3;
  opts.sigma = sigma;
  opts.leak_threshold = 1e-3;

  ConservationRun out;
  out.traj = evolve(data, 40.0, EvolveMode::kNonlinear, opts, 0.5);
  for (const auto& snap : out.traj.snapshots) {
    auto st = out.traj.state_at(snap.t);
    out.mass_drift = std::max(out.mass_drift, std::abs(mass(st) - m0) / m0);
    out.energy_drift = std::max(out.energy_drift, std::abs(energy(st, sigma) - e0) / e0);
  }
  out.mor = morawetz_accumulate(out.traj);
  return out;
}

void criteria_4_5_conservation_and_morawetz() {
  bool pass4 = true, pass5 = true;
  std::string d4, d5;
  for (int k : {1, ManifoldProfile::kHyperbolic}) {
    std::string lbl = k == ManifoldProfile::kHyperbolic ? "inf" : std::to_string(k);
    ConservationRun run = conservation_run(k);
    pass4 = pass4 && run.mass_drift <= 1e-8 && run.energy_drift <= 1e-4;
    d4 += " k=" + lbl + ": mass " + fmt(run.mass_drift) + ", energy " +
          fmt(run.energy_drift) + ";";

    // M(T) growth over [30, 40] and bound-ratio variation over [20, 40]
    const auto& mor = run.mor;
    double m30 = 0.0, m40 = mor.cumulative.back();
    double br_min = std::numeric_limits<double>::infinity(), br_max = 0.0;
    for (std::size_t i = 0; i < mor.t.size(); ++i) {
      if (mor.t[i] <= 30.0 + 1e-9) m30 = mor.cumulative[i];
      if (mor.t[i] >= 20.0 - 1e-9) {
        br_min = std::min(br_min, mor.bound_ratio[i]);
        br_max = std::max(br_max, mor.bound_ratio[i]);
      }
    }
    double growth = (m40 - m30) / m30;
    double br_var = (br_max - br_min) / br_max;
    pass5 = pass5 && growth < 0.02 && br_var < 0.10;
    d5 += " k=" + lbl + ": tail growth " + fmt(100 * growth) + "%, bound-ratio var " +
          fmt(100 * br_var) + "%;";
  }
  report(4, pass4, "conservation (n=4, k in {1, inf}, sigma=0.5, T=40):" + d4 +
                       " need mass <= 1e-8, energy <= 1e-4");
  report(5, pass5, "morawetz saturation:" + d5 + " need growth < 2%, variation < 10%");
}

void criterion_6_scattering_detection() {
  bool pass = true;
  std::string detail;
  struct Case {
    int k;
    double sigma;
  };
  for (Case c : {Case{ManifoldProfile::kHyperbolic, 0.4}, Case{1, 0.3}}) {
    auto grid = make_grid(4, c.k, 320.0, 16384);
    auto data = gaussian_data(grid, 1.0, 1.0);
    IntegratorOptions opts;
    opts.dt = 1e-3;
    opts.sigma = c.sigma;
    opts.leak_threshold = 1e-3;
    Timer timer;
    auto traj = evolve(data, 40.0, EvolveMode::kNonlinear, opts, 0.5);
    auto d12 = scattering_defect(traj, 10.0, 20.0);
    auto d24 = scattering_defect(traj, 20.0, 40.0);
    double ratio = d12.defect / d24.defect;
    bool ok = d12.defect > d24.defect && ratio >= 1.5 && d12.reliable && d24.reliable &&
              timer.seconds() < 900.0;
    pass = pass && ok;
    detail += std::string(" k=") +
              (c.k == ManifoldProfile::kHyperbolic ? "inf" : std::to_string(c.k)) +
              " sigma=" + fmt(c.sigma) + ": defect(10,20)=" + fmt(d12.defect) +
              ", defect(20,40)=" + fmt(d24.defect) + ", ratio " + fmt(ratio) + " [" +
              fmt(timer.seconds()) + "s];";
  }
  report(6, pass, "scattering Cauchy decrease (ratio >= 1.5):" + detail);
}

void criterion_7_borderline_contrast() {
  const double sigma = 0.2;
  auto run_beta = [&](int k) {
    auto grid = make_grid(4, k, 352.0, 16384);
    auto data = gaussian_data(grid, 1.0, 1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    opts.sigma = sigma;
    opts.leak_threshold = 1e-3;
    auto traj = evolve(data, 48.0, EvolveMode::kNonlinear, opts, 0.5);
    return longrange_indicator(traj, 12.0);
  };
  auto lr0 = run_beta(0);
  auto lr1 = run_beta(1);
  bool pass = lr0.beta_fit && lr1.beta_fit && (*lr1.beta_fit - *lr0.beta_fit >= 0.5);
  std::string detail =
      "longrange contrast at sigma=0.2: beta(k=0)=" +
      (lr0.beta_fit ? fmt(*lr0.beta_fit) : "undetermined") + " (predicted " +
      fmt(lr0.predicted) + ", resid " + fmt(lr0.fit_residual) + "), beta(k=1)=" +
      (lr1.beta_fit ? fmt(*lr1.beta_fit) : "undetermined") + " (predicted " +
      fmt(lr1.predicted) + ", resid " + fmt(lr1.fit_residual) + ")";
  if (lr0.beta_fit && lr1.beta_fit)
    detail += ", contrast " + fmt(*lr1.beta_fit - *lr0.beta_fit) + " (need >= 0.5)";
  report(7, pass, detail);
}

void criterion_8_asymptotic_profile() {
  auto grid = make_grid(4, ManifoldProfile::kHyperbolic, 320.0, 16384);
  auto data = gaussian_data(grid, 1.0, 1.0);
  IntegratorOptions opts;
  opts.dt = 1e-3;
  opts.leak_threshold = 1e-3;
  auto traj = evolve(data, 40.0, EvolveMode::kFree, opts, 0.5);
  auto rho = default_rho_grid(400, 0.4, 8.0);
  auto f20 = extract_profile(traj, 20.0, rho);
  auto f40 = extract_profile(traj, 40.0, rho);
  double sup_diff = 0.0, sup40 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    sup_diff = std::max(sup_diff, std::abs(f40.F[i] - f20.F[i]));
    sup40 = std::max(sup40, f40.F[i]);
  }
  double stab = sup_diff / sup40;
  bool pass = stab < 0.05 && f40.unitarity_defect < 0.02;
  report(8, pass,
         "profile stabilization: sup-rel diff(F20, F40) " + fmt(100 * stab) +
             "% (< 5%), unitarity defect at t=40 " + fmt(100 * f40.unitarity_defect) +
             "% (< 2%)");
}

void criterion_9_phase_constant() {
  auto run_lambda = [&](int n) {
    auto grid = make_grid(n, ManifoldProfile::kHyperbolic, 180.0, 8192);
    auto data = gaussian_data(grid, 1.0, 1.0);
    IntegratorOptions opts;
    opts.dt = 2e-3;
    opts.leak_threshold = 1e-2;
    auto traj = evolve(data, 24.0, EvolveMode::kFree, opts, 0.25);
    return fit_asymptotic_phase(traj, 8.0, 24.0);
  };
  auto f3 = run_lambda(3);
  auto f5 = run_lambda(5);
  bool pass3 = std::abs(f3.lambda - 1.0) <= 0.05;
  // n=5 candidates: (n-1)/2 = 2 and (n-1)^2/4 = 4
  bool match_half = f5.dist_half <= 0.1;
  bool match_quarter = f5.dist_quarter <= 0.1;
  bool pass5 = match_half || match_quarter;
  std::string verdict = match_quarter ? "matches (n-1)^2/4 = 4"
                        : match_half  ? "matches (n-1)/2 = 2"
                                      : "matches neither candidate";
  report(9, pass3 && pass5,
         "phase constant: n=3 lambda=" + fmt(f3.lambda) + " (1 +- 0.05), n=5 lambda=" +
             fmt(f5.lambda) + " " + verdict + " (residuals " + fmt(f3.residual) + ", " +
             fmt(f5.residual) + ")");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1_geometry_certificate();
  criterion_2_exponent_boundary();
  criterion_3_euclidean_oracle();
  criteria_4_5_conservation_and_morawetz();
  criterion_6_scattering_detection();
  criterion_7_borderline_contrast();
  criterion_8_asymptotic_profile();
  criterion_9_phase_constant();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
