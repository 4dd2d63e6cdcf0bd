#include "warpnls/geometry.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <numbers>

namespace warpnls {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Above this radius sinh^3 r and friends are evaluated through logs; below,
// directly.  Chosen well inside the double range so every intermediate stays
// representable.
constexpr double kHypLogSwitch = 30.0;

// phi(r) = r * s_odd(r^2), phi'(r) = s_even(r^2), and the second/third
// derivatives reuse the same coefficient tables truncated one order lower:
//   s_odd (x; k) = sum_{j=0..k} x^j / (2j+1)!
//   s_even(x; k) = sum_{j=0..k} x^j / (2j)!
//   phi''  = r * s_odd(r^2; k-1),  phi''' = s_even(r^2; k-1).
// All coefficients are positive, so plain Horner is already well
// conditioned; the compensated variant below keeps the relative error at
// the ulp scale even for large k and r.

struct TwoSum {
  double hi, lo;
};

inline TwoSum two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline TwoSum two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}

// Compensated Horner: returns the polynomial value plus a first-order error
// correction, effectively doubling working precision.
double horner_compensated(std::span<const double> coeff, double x) {
  double s = coeff[coeff.size() - 1];
  double c = 0.0;
  for (std::size_t i = coeff.size() - 1; i-- > 0;) {
    auto [p, pe] = two_prod(s, x);
    auto [t, te] = two_sum(p, coeff[i]);
    s = t;
    c = c * x + (pe + te);
  }
  return s + c;
}

// Coefficient tables 1/(2j+1)! and 1/(2j)!, built once (keeps the module
// reentrant).  k beyond the table is far outside double range anyway.
constexpr int kMaxK = 64;

const std::vector<double>& odd_coeffs(int k) {
  static const std::vector<double> table = [] {
    std::vector<double> t{1.0};
    for (int j = 1; j <= kMaxK; ++j) t.push_back(t.back() / ((2.0 * j) * (2.0 * j + 1.0)));
    return t;
  }();
  if (k > kMaxK) throw std::domain_error("geometry: k too large");
  return table;
}

const std::vector<double>& even_coeffs(int k) {
  static const std::vector<double> table = [] {
    std::vector<double> t{1.0};
    for (int j = 1; j <= kMaxK; ++j) t.push_back(t.back() / ((2.0 * j - 1.0) * (2.0 * j)));
    return t;
  }();
  if (k > kMaxK) throw std::domain_error("geometry: k too large");
  return table;
}

double s_odd(double x, int k) {
  const auto& c = odd_coeffs(k);
  return horner_compensated(std::span(c.data(), static_cast<std::size_t>(k) + 1), x);
}

double s_even(double x, int k) {
  const auto& c = even_coeffs(k);
  return horner_compensated(std::span(c.data(), static_cast<std::size_t>(k) + 1), x);
}

// s_odd'(x) and s_odd''(x) (derivatives in x = r^2), used by the stable
// form of the tilde-u potential.
double s_odd_d1(double x, int k) {
  if (k < 1) return 0.0;
  std::vector<double> c(static_cast<std::size_t>(k));
  const auto& base = odd_coeffs(k);
  for (int j = 1; j <= k; ++j) c[j - 1] = j * base[j];
  return horner_compensated(c, x);
}

double s_odd_d2(double x, int k) {
  if (k < 2) return 0.0;
  std::vector<double> c(static_cast<std::size_t>(k) - 1);
  const auto& base = odd_coeffs(k);
  for (int j = 2; j <= k; ++j) c[j - 2] = static_cast<double>(j) * (j - 1) * base[j];
  return horner_compensated(c, x);
}

void check_radius(double r) {
  if (std::isnan(r) || r < 0.0)
    throw std::domain_error("geometry: radius must be >= 0");
  if (std::isinf(r)) throw std::domain_error("geometry: radius must be finite");
}

// log(sinh r) and log(cosh r), stable for large r.
double log_sinh(double r) { return r - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * r)); }
double log_cosh(double r) { return r - std::numbers::ln2 + std::log1p(std::exp(-2.0 * r)); }

// Coefficients of the positive series
//   g(r) = phi' phi'' - phi phi'''
//        = sum_{j=0}^{k-1} (1/(2j+1) - 1/(2k+1)) / ((2j)! (2k)!) r^(2k+2j+1),
// the factored numerator piece of -Delta^2 a.  Its primitive gives
//   G(r) = (phi')^2 - phi phi'' = 1 + sum_j c_j/(2k+2j+2) r^(2k+2j+2).
// Both are sums of positive terms, so they dodge the cancellation that
// kills direct evaluation of the products at small r.
struct CrossSeries {
  std::vector<double> g_coeff;  // c_j
  std::vector<double> G_coeff;  // c_j / (2k+2j+2)
};

const CrossSeries& cross_series(int k) {
  static const std::vector<CrossSeries> cache = [] {
    std::vector<CrossSeries> all;
    for (int kk = 0; kk <= kMaxK; ++kk) {
      CrossSeries cs;
      double fact2k = 1.0;
      for (int i = 2; i <= 2 * kk; ++i) fact2k *= i;
      double fact2j = 1.0;
      for (int j = 0; j < kk; ++j) {
        if (j > 0) fact2j *= (2.0 * j - 1.0) * (2.0 * j);
        double cj = (1.0 / (2.0 * j + 1.0) - 1.0 / (2.0 * kk + 1.0)) / (fact2j * fact2k);
        cs.g_coeff.push_back(cj);
        cs.G_coeff.push_back(cj / (2.0 * kk + 2.0 * j + 2.0));
      }
      all.push_back(std::move(cs));
    }
    return all;
  }();
  if (k > kMaxK) throw std::domain_error("geometry: k too large");
  return cache[static_cast<std::size_t>(k)];
}

// g(r) and G(r) in doubles via the positive series.
double cross_g(int k, double r) {
  if (k == 0) return 0.0;
  const auto& cs = cross_series(k);
  double x = r * r;
  double acc = 0.0;
  for (std::size_t j = cs.g_coeff.size(); j-- > 0;) acc = acc * x + cs.g_coeff[j];
  return acc * std::pow(r, 2 * k + 1);
}

double cross_G(int k, double r) {
  if (k == 0) return 1.0;
  const auto& cs = cross_series(k);
  double x = r * r;
  double acc = 0.0;
  for (std::size_t j = cs.G_coeff.size(); j-- > 0;) acc = acc * x + cs.G_coeff[j];
  return 1.0 + acc * std::pow(r, 2 * k + 2);
}

// --- exact arithmetic for the certificate ----------------------------------
//
// Every double radius is a dyadic rational p/q, so the jet values are exact
// fractions over the single scale S = (2k+1)! q^(2k+1).  Working with the
// scaled integer numerators avoids per-operation gcd normalization; only the
// final margins are converted through cpp_rational.

using BigInt = boost::multiprecision::cpp_int;

BigInt int_factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct ExactJet {
  BigInt phi, dphi, d2phi, d3phi;  // numerators over the common scale
  BigInt scale;                    // S = (2k+1)! q^(2k+1)
  std::vector<BigInt> p_pow, q_pow;
};

ExactJet phi_jet_exact(int k, double r) {
  Rational rr(r);
  BigInt p = boost::multiprecision::numerator(rr);
  BigInt q = boost::multiprecision::denominator(rr);

  ExactJet out;
  const int top = 4 * k + 3;
  out.p_pow.resize(top + 1);
  out.q_pow.resize(top + 1);
  out.p_pow[0] = 1;
  out.q_pow[0] = 1;
  for (int e = 1; e <= top; ++e) {
    out.p_pow[e] = out.p_pow[e - 1] * p;
    out.q_pow[e] = out.q_pow[e - 1] * q;
  }
  BigInt f2k1 = int_factorial(2 * k + 1);
  out.scale = f2k1 * out.q_pow[2 * k + 1];
  out.phi = out.dphi = out.d2phi = out.d3phi = 0;
  for (int j = 0; j <= k; ++j) {
    out.phi += (f2k1 / int_factorial(2 * j + 1)) * out.p_pow[2 * j + 1] *
               out.q_pow[2 * (k - j)];
    out.dphi += (f2k1 / int_factorial(2 * j)) * out.p_pow[2 * j] *
                out.q_pow[2 * (k - j) + 1];
    if (j >= 1) {
      out.d2phi += (f2k1 / int_factorial(2 * j - 1)) * out.p_pow[2 * j - 1] *
                   out.q_pow[2 * k + 2 - 2 * j];
      out.d3phi += (f2k1 / int_factorial(2 * j - 2)) * out.p_pow[2 * j - 2] *
                   out.q_pow[2 * k + 3 - 2 * j];
    }
  }
  return out;
}

// (phi' phi'' - phi phi''') S^2 recomputed from the closed double sum
// sum_j 2(k-j)/((2j+1)!(2k+1)!) r^(2k+2j+1); integer-exact.
BigInt cross_sum_exact_scaled(int k, const ExactJet& jet) {
  BigInt f2k1 = int_factorial(2 * k + 1);
  BigInt acc = 0;
  for (int j = 0; j < k; ++j)
    acc += 2 * (k - j) * (f2k1 / int_factorial(2 * j + 1)) *
           jet.p_pow[2 * k + 2 * j + 1] * jet.q_pow[2 * k - 2 * j + 1];
  return acc;
}

}  // namespace

std::string ManifoldProfile::label() const {
  return "n=" + std::to_string(n_) + ",k=" + (is_hyperbolic() ? "inf" : std::to_string(k_));
}

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

PhiJet phi_eval(const ManifoldProfile& profile, double r) {
  check_radius(r);
  if (profile.is_hyperbolic())
    return {std::sinh(r), std::cosh(r), std::sinh(r), std::cosh(r)};
  const int k = profile.k();
  const double x = r * r;
  PhiJet jet;
  jet.phi = r * s_odd(x, k);
  jet.dphi = s_even(x, k);
  jet.d2phi = (k >= 1) ? r * s_odd(x, k - 1) : 0.0;
  jet.d3phi = (k >= 1) ? s_even(x, k - 1) : 0.0;
  if (!std::isfinite(jet.phi) || !std::isfinite(jet.dphi))
    throw std::range_error("phi_eval: overflow at r=" + std::to_string(r) +
                           " for k=" + std::to_string(k));
  return jet;
}

double log_strichartz_weight(const ManifoldProfile& profile, double r) {
  check_radius(r);
  const double beta = (profile.n() - 1) / 2.0;
  if (profile.is_hyperbolic()) {
    if (r == 0.0) return 0.0;
    if (r < 1e-2) {
      // sinh r / r = 1 + r^2/6 + r^4/120 + r^6/5040, already exact to 1e-15 here
      double x = r * r;
      return beta * std::log1p(x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
    }
    if (r > kHypLogSwitch) return beta * (log_sinh(r) - std::log(r));
    return beta * std::log(std::sinh(r) / r);
  }
  // phi(r)/r = s_odd(r^2) termwise, exact at r = 0
  double s = s_odd(r * r, profile.k());
  if (!std::isfinite(s))
    throw std::range_error("strichartz_weight: overflow at r=" + std::to_string(r));
  return beta * std::log(s);
}

double strichartz_weight(const ManifoldProfile& profile, double r) {
  double lw = log_strichartz_weight(profile, r);
  double w = std::exp(lw);
  if (std::isinf(w))
    throw std::range_error("strichartz_weight: overflow at r=" + std::to_string(r) +
                           " (use log_strichartz_weight)");
  return w;
}

MorawetzWeights morawetz_weights(const ManifoldProfile& profile, double r) {
  check_radius(r);
  if (r == 0.0)
    throw std::domain_error("morawetz_weights: r = 0 (use the r->0 asymptote)");
  const int n = profile.n();
  if (profile.is_hyperbolic()) {
    if (r > kHypLogSwitch) {
      double lc = log_cosh(r), ls = log_sinh(r);
      return {(n - 1.0) * std::exp(lc - ls),
              (n - 1.0) * (n - 3.0) * std::exp(lc - 3.0 * ls)};
    }
    double sh = std::sinh(r), ch = std::cosh(r);
    return {(n - 1.0) * ch / sh, (n - 1.0) * (n - 3.0) * ch / (sh * sh * sh)};
  }
  const int k = profile.k();
  PhiJet j = phi_eval(profile, r);
  double lap = (n - 1.0) * j.dphi / j.phi;
  // factored numerator (n-3) phi' G + phi g with positive-series G, g
  double num = (n - 3.0) * j.dphi * cross_G(k, r) + j.phi * cross_g(k, r);
  double neg_bilap = (n - 1.0) * num / (j.phi * j.phi * j.phi);
  return {lap, neg_bilap};
}

EffectivePotential effective_potential(const ManifoldProfile& profile, double r) {
  check_radius(r);
  const int n = profile.n();
  const double c2 = (n - 1.0) * (n - 3.0) / 4.0;

  // V in the subtraction-free form
  //   V = (n-1) [ (3 s' + 2 x s'') / s + (n-3) (s'/s + x (s'/s)^2) ],
  // with s(x) = phi(r)/r, x = r^2.  Regular at r = 0 and monotone-safe for
  // all finite k; for the hyperbolic case s, s', s'' come from sinh/cosh
  // (series below r = 1 where r cosh r - sinh r cancels).
  double x = r * r;
  double s, s1, s2;
  if (profile.is_hyperbolic()) {
    if (r < 1.0) {
      // enough terms of sum x^j/(2j+1)! for 1e-16 at x <= 1
      const auto& c = odd_coeffs(12);
      s = horner_compensated(std::span(c.data(), 13), x);
      std::vector<double> d1(12), d2(11);
      for (int j = 1; j <= 12; ++j) d1[static_cast<std::size_t>(j) - 1] = j * c[static_cast<std::size_t>(j)];
      for (int j = 2; j <= 12; ++j) d2[static_cast<std::size_t>(j) - 2] = static_cast<double>(j) * (j - 1) * c[static_cast<std::size_t>(j)];
      s1 = horner_compensated(d1, x);
      s2 = horner_compensated(d2, x);
    } else if (r <= kHypLogSwitch) {
      double sh = std::sinh(r), ch = std::cosh(r);
      s = sh / r;
      s1 = (r * ch - sh) / (2.0 * r * r * r);
      s2 = sh / (4.0 * r * r * r) - 3.0 * (r * ch - sh) / (4.0 * r * r * r * r * r);
    } else {
      // coth r = 1 to machine precision here; V = (n-1)/2 + c2 (1 - 1/r^2)
      double V = (n - 1.0) / 2.0 + c2 * (1.0 - 1.0 / x);
      double V_eff = V + c2 / x;
      return {V, V_eff, x * V};
    }
  } else {
    const int k = profile.k();
    if (r == 0.0) {
      double sp0 = (k >= 1) ? 1.0 / 6.0 : 0.0;
      double V0 = (n - 1.0) * n * sp0;
      return {V0, std::numeric_limits<double>::infinity(), 0.0};
    }
    s = s_odd(x, profile.k());
    s1 = s_odd_d1(x, profile.k());
    s2 = s_odd_d2(x, profile.k());
  }
  if (r == 0.0) {
    double V0 = (n - 1.0) * n * s1;  // s1(0) = 1/6 for the hyperbolic case
    return {V0, std::numeric_limits<double>::infinity(), 0.0};
  }
  double q = s1 / s;
  double V = (n - 1.0) * ((3.0 * s1 + 2.0 * x * s2) / s + (n - 3.0) * (q + x * q * q));
  double V_eff = V + c2 / x;
  return {V, V_eff, x * V};
}

GeometryAtPoint geometry_at(const ManifoldProfile& profile, double r) {
  GeometryAtPoint g;
  g.r = r;
  PhiJet j = phi_eval(profile, r);
  g.phi = j.phi;
  g.dphi = j.dphi;
  g.d2phi = j.d2phi;
  g.d3phi = j.d3phi;
  g.log_w = log_strichartz_weight(profile, r);
  g.w = std::exp(g.log_w);
  if (r > 0.0) {
    auto mw = morawetz_weights(profile, r);
    g.lap_a = mw.lap_a;
    g.neg_bilap_a = mw.neg_bilap_a;
  } else {
    g.lap_a = std::numeric_limits<double>::infinity();
    g.neg_bilap_a = std::numeric_limits<double>::infinity();
  }
  auto pot = effective_potential(profile, r);
  g.V = pot.V;
  g.V_eff = pot.V_eff;
  return g;
}

CertificateReport positivity_certificate(const ManifoldProfile& profile,
                                         std::span<const double> r_grid) {
  if (profile.is_hyperbolic() || profile.k() < 1)
    throw std::invalid_argument(
        "positivity_certificate: requires finite k >= 1 (identity (d) is "
        "specific to the truncated series; for k=0 both sides of (b) vanish)");
  const int n = profile.n();
  const int k = profile.k();

  CertificateReport report{profile, {}, true,
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity()};
  report.points.reserve(r_grid.size());

  constexpr double kTolD = 1e-10;

  for (double r : r_grid) {
    if (!(r > 0.0))
      throw std::domain_error("positivity_certificate: grid radii must be > 0");
    ExactJet j = phi_jet_exact(k, r);
    const BigInt& S = j.scale;
    BigInt S2 = S * S;
    BigInt S3 = S2 * S;

    BigInt G = j.dphi * j.dphi - j.phi * j.d2phi;            // x S^2
    BigInt g_direct = j.dphi * j.d2phi - j.phi * j.d3phi;    // x S^2

    BigInt ma = j.dphi * G - S3;                             // (a) x S^3
    BigInt mb = j.phi * g_direct;                            // (b) x S^3
    BigInt num = (n - 3) * j.dphi * G + j.phi * g_direct;    // x S^3
    // (c): (n-1) num S^3 / (phi S)^3 = (n-1) num / phi^3, a plain ratio
    Rational mc = Rational((n - 1) * num, j.phi * j.phi * j.phi);

    // (d): production double series against the exact closed double sum,
    // whose integer identity with the direct product is also checked.
    BigInt g_sum = cross_sum_exact_scaled(k, j);
    double g_series = cross_g(k, r);
    double g_exact = static_cast<double>(Rational(g_sum, S2));
    double rel_err = (g_exact == 0.0) ? std::abs(g_series)
                                      : std::abs(g_series - g_exact) / std::abs(g_exact);
    bool identity_ok = (g_sum == g_direct);

    CertificatePoint pt;
    pt.r = r;
    pt.margin_a = static_cast<double>(Rational(ma, S3));
    pt.margin_b = static_cast<double>(Rational(mb, S3));
    pt.margin_c = static_cast<double>(mc);
    pt.margin_d = kTolD - rel_err;
    pt.pass_a = ma > 0;
    pt.pass_b = mb > 0;
    pt.pass_c = mc > 0;
    pt.pass_d = identity_ok && rel_err <= kTolD;

    report.all_pass = report.all_pass && pt.all_pass();
    report.worst_margin_a = std::min(report.worst_margin_a, pt.margin_a);
    report.worst_margin_b = std::min(report.worst_margin_b, pt.margin_b);
    report.worst_margin_c = std::min(report.worst_margin_c, pt.margin_c);
    report.worst_margin_d = std::min(report.worst_margin_d, pt.margin_d);
    report.points.push_back(pt);
  }
  return report;
}

}  // namespace warpnls
