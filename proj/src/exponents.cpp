#include "warpnls/exponents.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace warpnls {

namespace {

constexpr double kMarginFloor = 1e-9;   // strict inequalities certified above this
constexpr double kBisectRes = 1e-6;     // dyadic bisection resolution in alpha
constexpr double kGridStepA = 1e-3;     // scan step for the Sobolev exponent a

double two_star(int n) { return 2.0 * n / (n - 2.0); }

// Margins of all strict conditions at (alpha, and optionally a).  Feasible
// means every entry > 0; certified means every entry >= kMarginFloor.
struct Margins {
  double integrability;
  double theta_finite;  // 1/theta > 0
  double theta_gt_one;  // 1 - 1/theta > 0
  double alpha_window;  // 2 sigma - alpha > 0
  double min() const {
    return std::min(std::min(integrability, theta_finite),
                    std::min(theta_gt_one, alpha_window));
  }
};

Margins hyperbolic_margins(int n, double sigma, double alpha) {
  double inv_theta = 2.0 / n - (n - 2.0) * sigma / n - 2.0 * alpha / n;
  double integ = (2.0 * sigma - alpha) / two_star(n) - alpha / (n - 1.0) + alpha / 2.0;
  return {integ, inv_theta, 1.0 - inv_theta, 2.0 * sigma - alpha};
}

Margins m_case_margins(int n, double N, double a, double sigma, double alpha) {
  // 1/theta is pinned by the Hoelder budget together with admissibility:
  //   1/theta = 1/q' - alpha/2 - (2 sigma - alpha)/a - 1/2*
  //           = 2/n - 2 sigma/a - alpha (1/n + 1/2 - 1/a);
  // the 1/a term enters with a plus (re-substitution check in the tests).
  double inv_theta = 2.0 / n - 2.0 * sigma / a - alpha * (1.0 / n + 0.5 - 1.0 / a);
  double integ = (2.0 / n - 2.0 / N - alpha * (0.5 / N + 1.0 / n)) - inv_theta;
  return {integ, inv_theta, 1.0 - inv_theta, 2.0 * sigma - alpha};
}

// Largest alpha in (0, hi) with margins(alpha).min() > 0, by bisection on a
// monotone-boundary predicate, then stepped back one resolution so the
// returned point is strictly interior.
template <typename MarginsFn>
std::optional<double> bisect_largest_alpha(double hi, MarginsFn margins) {
  if (!(margins(0.0).min() > 0.0) && !(margins(kBisectRes).min() > 0.0))
    return std::nullopt;
  double lo = 0.0;
  double top = hi;
  if (margins(top).min() > 0.0) {
    lo = top;
  } else {
    while (top - lo > kBisectRes) {
      double mid = 0.5 * (lo + top);
      (margins(mid).min() > 0.0 ? lo : top) = mid;
    }
  }
  double alpha = lo - kBisectRes;
  while (alpha > 0.0 && !(margins(alpha).min() > 0.0)) alpha -= kBisectRes;
  if (alpha <= 0.0) {
    // feasible window narrower than the resolution; hand back its midpoint
    // so the caller can classify it by margin
    alpha = 0.5 * lo;
    if (!(alpha > 0.0) || !(margins(alpha).min() > 0.0)) return std::nullopt;
  }
  return alpha;
}

ExponentSolution assemble(int n, double N, double sigma, double alpha,
                          std::optional<double> a, const Margins& mg) {
  ExponentSolution sol;
  sol.alpha = alpha;
  sol.p = 2.0 / (1.0 - alpha);  // from 1/p' = alpha/2 + 1/2
  sol.q = 1.0 / (1.0 / two_star(n) + alpha / n);
  sol.theta = 1.0 / mg.theta_finite;
  sol.a = a;
  sol.sigma = sigma;
  sol.n = n;
  sol.N = N;
  sol.integrability_margin = mg.integrability;
  sol.min_margin = mg.min();
  return sol;
}

}  // namespace

std::string to_string(Feasibility f) {
  switch (f) {
    case Feasibility::kFeasible: return "FEASIBLE";
    case Feasibility::kInfeasible: return "INFEASIBLE";
    case Feasibility::kInfeasibleAtTolerance: return "INFEASIBLE-AT-TOLERANCE";
  }
  return "?";
}

bool is_admissible(int n, double p, double q) {
  if (n < 2) return false;
  if (!(p >= 2.0)) return false;
  if (p == 2.0 && std::isinf(q) && n == 2) return false;
  double lhs = (std::isinf(p) ? 0.0 : 2.0 / p) + (std::isinf(q) ? 0.0 : n / q);
  return std::abs(lhs - n / 2.0) <= 1e-12;
}

ExponentResult solve_exponents_hyperbolic(int n, double sigma) {
  if (n < 4)
    throw std::domain_error("solve_exponents_hyperbolic: requires n >= 4");
  if (!(sigma > 0.0))
    throw std::domain_error("solve_exponents_hyperbolic: requires sigma > 0");

  ExponentResult out;
  auto margins = [&](double alpha) { return hyperbolic_margins(n, sigma, alpha); };

  // At alpha = 0 the system is feasible iff sigma < 2/(n-2); quick certificate.
  if (hyperbolic_margins(n, sigma, 0.0).theta_finite <= 0.0) {
    out.status = Feasibility::kInfeasible;
    std::ostringstream os;
    os << "1/theta <= 0 already at alpha=0: sigma=" << sigma
       << " >= 2/(n-2)=" << 2.0 / (n - 2.0);
    out.detail = os.str();
    return out;
  }

  auto alpha = bisect_largest_alpha(2.0 * sigma, margins);
  if (!alpha) {
    out.status = Feasibility::kInfeasible;
    out.detail = "no alpha in (0, 2 sigma) satisfies the strict conditions";
    return out;
  }
  Margins mg = margins(*alpha);
  if (mg.min() < kMarginFloor) {
    out.status = Feasibility::kInfeasibleAtTolerance;
    out.detail = "feasible alpha exists but worst margin " + std::to_string(mg.min()) +
                 " is below 1e-9";
    return out;
  }
  out.status = Feasibility::kFeasible;
  out.solution = assemble(n, std::numeric_limits<double>::infinity(), sigma,
                          *alpha, std::nullopt, mg);
  return out;
}

ExponentResult solve_exponents_M(int n, int k, double sigma) {
  if (n < 4) throw std::domain_error("solve_exponents_M: requires n >= 4");
  if (k == ManifoldProfile::kHyperbolic)
    throw std::domain_error("solve_exponents_M: use solve_exponents_hyperbolic for k=inf");
  if (k < 1)
    throw std::domain_error("solve_exponents_M: requires k >= 1 (k=0 is Euclidean)");
  if (!(sigma > 0.0))
    throw std::domain_error("solve_exponents_M: requires sigma > 0");

  const double N = ManifoldProfile(n, k).scattering_dimension();
  ExponentResult out;

  // The a-window is (sigma n, sigma N) intersected with [2, 2*].
  const double ts = two_star(n);
  if (!(sigma * N > 2.0) || !(sigma * n < ts)) {
    out.status = Feasibility::kInfeasible;
    std::ostringstream os;
    os << "no a in [2," << ts << "] with a/N < sigma < a/n: requires 2/N="
       << 2.0 / N << " < sigma < 2/(n-2)=" << 2.0 / (n - 2.0) << ", got sigma=" << sigma;
    out.detail = os.str();
    return out;
  }

  std::optional<ExponentSolution> best;
  bool any_feasible = false;
  const long steps = std::lround((ts - 2.0) / kGridStepA);
  for (long i = 0; i <= steps; ++i) {
    double a = 2.0 + kGridStepA * static_cast<double>(i);
    if (a > ts) a = ts;
    if (!(a / N < sigma && sigma < a / n)) continue;
    auto margins = [&](double alpha) { return m_case_margins(n, N, a, sigma, alpha); };
    auto alpha = bisect_largest_alpha(2.0 * sigma, margins);
    if (!alpha) continue;
    any_feasible = true;
    Margins mg = margins(*alpha);
    if (mg.min() < kMarginFloor) continue;
    if (!best || mg.integrability > best->integrability_margin)
      best = assemble(n, N, sigma, *alpha, a, mg);
  }

  if (best) {
    out.status = Feasibility::kFeasible;
    out.solution = best;
  } else if (any_feasible) {
    out.status = Feasibility::kInfeasibleAtTolerance;
    out.detail = "feasible (a, alpha) exist but none with margin >= 1e-9";
  } else {
    out.status = Feasibility::kInfeasible;
    out.detail = "a-window nonempty but no (a, alpha) satisfies the strict conditions";
  }
  return out;
}

double bootstrap_threshold(double theta, double eps2) {
  if (!(theta > 1.0)) throw std::domain_error("bootstrap_threshold: requires theta > 1");
  if (!(eps2 > 0.0)) throw std::domain_error("bootstrap_threshold: requires eps2 > 0");
  return (1.0 - 1.0 / theta) * std::pow(theta * eps2, -1.0 / (theta - 1.0));
}

BootstrapCheck bootstrap_check(std::span<const double> M_series, double eps1,
                               double eps2, double theta) {
  if (!(theta > 1.0)) throw std::domain_error("bootstrap_check: requires theta > 1");
  BootstrapCheck out;
  out.threshold_ok = eps1 < bootstrap_threshold(theta, eps2);
  if (M_series.empty()) return out;
  out.seed_ok = M_series[0] <= std::pow(theta * eps2, -1.0 / (theta - 1.0));
  out.hypothesis_holds = true;
  out.conclusion_holds = true;
  const double bound = theta / (theta - 1.0) * eps1;
  for (double M : M_series) {
    if (M > eps1 + eps2 * std::pow(M, theta)) out.hypothesis_holds = false;
    if (bound > 0.0)
      out.worst_conclusion_ratio = std::max(out.worst_conclusion_ratio, M / bound);
    else if (M > 0.0)
      out.worst_conclusion_ratio = std::numeric_limits<double>::infinity();
    if (M > bound) out.conclusion_holds = false;
  }
  return out;
}

}  // namespace warpnls
