#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "warpnls/exponents.hpp"

using namespace warpnls;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// re-substitute a solution into every defining identity and strict condition
void certify(const ExponentSolution& s) {
  const int n = s.n;
  const double ts = 2.0 * n / (n - 2.0);
  CHECK(is_admissible(n, s.p, s.q));
  // 1/q = 1/2* + alpha/n
  CHECK(1.0 / s.q == doctest::Approx(1.0 / ts + s.alpha / n).epsilon(1e-12));
  // 1/p' = alpha/2 + 1/2
  CHECK(1.0 - 1.0 / s.p == doctest::Approx(s.alpha / 2.0 + 0.5).epsilon(1e-12));
  // Hoelder budget: 1/q' = alpha/2 + (2s-alpha)/a* + 1/2* + 1/theta
  double a_star = s.a ? *s.a : ts;
  double lhs = 1.0 - 1.0 / s.q;
  double rhs = s.alpha / 2.0 + (2.0 * s.sigma - s.alpha) / a_star + 1.0 / ts + 1.0 / s.theta;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  CHECK(s.theta > 1.0);
  CHECK(std::isfinite(s.theta));
  CHECK(s.alpha > 0.0);
  CHECK(2.0 * s.sigma - s.alpha > 0.0);
  CHECK(s.min_margin >= 1e-9);
  if (s.a) {
    CHECK(*s.a >= 2.0);
    CHECK(*s.a <= ts);
    CHECK(*s.a / s.N < s.sigma);
    CHECK(s.sigma < *s.a / n);
  }
}

}  // namespace

TEST_CASE("admissibility") {
  CHECK(is_admissible(4, 2.0, 4.0));       // endpoint (2, 2*)
  CHECK(is_admissible(4, kInf, 2.0));      // (inf, 2)
  CHECK(is_admissible(6, kInf, 2.0));
  CHECK_FALSE(is_admissible(2, 2.0, kInf));  // excluded triple
  CHECK_FALSE(is_admissible(4, 2.0, 4.1));
  CHECK_FALSE(is_admissible(4, 1.5, 6.0));   // p < 2
  CHECK(is_admissible(3, 4.0, 3.0));         // 2/4 + 3/3 = 1.5 = 3/2
}

TEST_CASE("hyperbolic system: feasible interior case") {
  auto res = solve_exponents_hyperbolic(4, 0.5);
  REQUIRE(res.feasible());
  certify(*res.solution);
  // at the alpha -> 0 boundary, 1/theta = 2/4 - (2/4)(0.5) = 1/4
  double inv_theta0 = 2.0 / 4.0 - (4.0 - 2.0) / 4.0 * 0.5;
  CHECK(inv_theta0 == doctest::Approx(0.25));
  // the solved theta is below the boundary value 4 (alpha > 0 pushes it up)
  CHECK(res.solution->theta > 4.0 - 1e-9);
}

TEST_CASE("hyperbolic system: boundary sigma = 2/(n-2) infeasible") {
  auto res = solve_exponents_hyperbolic(4, 1.0);
  CHECK(res.status == Feasibility::kInfeasible);
  CHECK(res.detail.find("2/(n-2)") != std::string::npos);
}

TEST_CASE("hyperbolic system: n=6 small sigma feasible (regression fixture)") {
  auto res = solve_exponents_hyperbolic(6, 0.25);
  REQUIRE(res.feasible());
  certify(*res.solution);
  // the binding constraints at n=6, sigma=1/4 are alpha < 2 sigma and
  // 1/theta = 1/6 - alpha/3 > 0, both hitting zero at alpha = 1/2; the
  // bisection lands one resolution step below
  CHECK(res.solution->alpha == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(res.solution->alpha < 0.5);
}

TEST_CASE("hyperbolic system: guaranteed feasible on (0, 2/(n-2))") {
  for (int n : {4, 5, 6, 8}) {
    double upper = 2.0 / (n - 2.0);
    for (double f : {0.05, 0.3, 0.7, 0.95}) {
      auto res = solve_exponents_hyperbolic(n, f * upper);
      REQUIRE(res.feasible());
      certify(*res.solution);
    }
  }
  CHECK_THROWS_AS(solve_exponents_hyperbolic(3, 0.5), std::domain_error);
  CHECK_THROWS_AS(solve_exponents_hyperbolic(4, 0.0), std::domain_error);
}

TEST_CASE("M system: examples from the feasibility window") {
  auto res = solve_exponents_M(4, 1, 0.5);  // N = 10, a = 3 would do
  REQUIRE(res.feasible());
  certify(*res.solution);

  CHECK(solve_exponents_M(4, 1, 0.19).status == Feasibility::kInfeasible);  // < 2/N
  CHECK(solve_exponents_M(4, 1, 1.0).status == Feasibility::kInfeasible);   // = 2/(n-2)

  CHECK_THROWS_AS(solve_exponents_M(4, 0, 0.5), std::domain_error);
  CHECK_THROWS_AS(solve_exponents_M(3, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(solve_exponents_M(4, ManifoldProfile::kHyperbolic, 0.5), std::domain_error);
}

TEST_CASE("M system: feasibility boundary matches (2/N, 2/(n-2)) on a coarse scan") {
  for (int n : {4, 5, 6})
    for (int k : {1, 2, 3}) {
      double N = (2.0 * k + 1) * (n - 1) + 1;
      double lo = 2.0 / N, hi = 2.0 / (n - 2.0);
      const double step = 1e-2;
      for (double sigma = step; sigma < hi + 0.1; sigma += step) {
        bool want = sigma > lo + step && sigma < hi - step;   // clear of both edges
        bool outside = sigma < lo - step || sigma > hi + step;
        auto res = solve_exponents_M(n, k, sigma);
        if (want) CHECK(res.feasible());
        if (outside) CHECK_FALSE(res.feasible());
      }
    }
}

TEST_CASE("M system: infimum of feasible sigma strictly decreasing in k") {
  for (int n : {4, 5, 6}) {
    double prev = 2.0 / n;  // Euclidean borderline
    for (int k = 1; k <= 4; ++k) {
      // bisect the feasibility edge
      double lo = 1e-4, hi = 2.0 / (n - 2.0) / 2.0;
      for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        (solve_exponents_M(n, k, mid).feasible() ? hi : lo) = mid;
      }
      CHECK(hi < prev);
      CHECK(hi == doctest::Approx(2.0 / ((2.0 * k + 1) * (n - 1) + 1)).epsilon(1e-2));
      prev = hi;
    }
  }
}

TEST_CASE("bootstrap threshold and check") {
  CHECK(bootstrap_threshold(2.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(bootstrap_threshold(3.0, 0.5) ==
        doctest::Approx((2.0 / 3.0) * std::pow(1.5, -0.5)).epsilon(1e-15));
  CHECK(bootstrap_threshold(3.0, 0.5) == doctest::Approx(0.54433).epsilon(1e-5));
  CHECK_THROWS_AS(bootstrap_threshold(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bootstrap_threshold(2.0, 0.0), std::domain_error);

  // zero trajectory passes with the theta=2, eps2=1, eps1=0.1 data
  std::vector<double> zeros(10, 0.0);
  auto chk = bootstrap_check(zeros, 0.1, 1.0, 2.0);
  CHECK(chk.hypothesis_holds);
  CHECK(chk.seed_ok);
  CHECK(chk.threshold_ok);
  CHECK(chk.conclusion_holds);

  // conclusion bound is theta/(theta-1) eps1 = 2 eps1
  std::vector<double> series{0.0, 0.05, 0.19};
  auto chk2 = bootstrap_check(series, 0.1, 1.0, 2.0);
  CHECK(chk2.conclusion_holds);
  std::vector<double> bad{0.0, 0.05, 0.21};
  CHECK_FALSE(bootstrap_check(bad, 0.1, 1.0, 2.0).conclusion_holds);
}
