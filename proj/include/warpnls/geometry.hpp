#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Geometry of the rotationally symmetric manifolds M_k^n with metric
// dr^2 + phi(r)^2 dw^2, where phi is the order-(2k+1) truncation of the
// sinh series.  k = 0 is Euclidean space (phi = r), k = infinity is
// hyperbolic space (phi = sinh r).  Everything downstream (weights,
// potentials, Morawetz densities) is a closed-form function of
// (phi, phi', phi'', phi''') and is evaluated here with attention to
// overflow and cancellation at both ends of the half-line.

namespace warpnls {

/// (n, k) pair identifying the manifold. k is a non-negative integer or
/// the distinguished hyperbolic value.
class ManifoldProfile {
public:
  static constexpr int kHyperbolic = -1;

  ManifoldProfile(int n, int k) : n_(n), k_(k) {
    if (n < 2) throw std::domain_error("ManifoldProfile: need n >= 2");
    if (k < 0 && k != kHyperbolic)
      throw std::domain_error("ManifoldProfile: k must be >= 0 or hyperbolic");
  }

  static ManifoldProfile euclidean(int n) { return {n, 0}; }
  static ManifoldProfile hyperbolic(int n) { return {n, kHyperbolic}; }

  int n() const { return n_; }
  int k() const { return k_; }
  bool is_hyperbolic() const { return k_ == kHyperbolic; }
  bool is_euclidean() const { return k_ == 0; }

  /// N = (2k+1)(n-1)+1; +infinity in the hyperbolic case (the borderline
  /// 2/N then degenerates to 0).
  double scattering_dimension() const {
    if (is_hyperbolic()) return std::numeric_limits<double>::infinity();
    return static_cast<double>((2 * k_ + 1) * (n_ - 1) + 1);
  }

  std::string label() const;

  friend bool operator==(const ManifoldProfile&, const ManifoldProfile&) = default;

private:
  int n_;
  int k_;
};

/// phi and its first three derivatives at one radius.
struct PhiJet {
  double phi;
  double dphi;
  double d2phi;
  double d3phi;
};

/// Everything the rest of the code wants to know about the geometry at a
/// single radius r > 0.
struct GeometryAtPoint {
  double r;
  double phi, dphi, d2phi, d3phi;
  double w;            // Strichartz weight (phi/r)^((n-1)/2)
  double log_w;        // log of the above, safe at large r
  double lap_a;        // Laplacian of a(x)=r
  double neg_bilap_a;  // -Delta^2 a, the Morawetz density weight
  double V;            // potential of the tilde-u reduction (regular at 0)
  double V_eff;        // potential of the w reduction; ~ (n-1)(n-3)/(4 r^2) at 0
};

PhiJet phi_eval(const ManifoldProfile& profile, double r);

/// (phi(r)/r)^((n-1)/2) with w(0) = 1 (removable singularity).
double strichartz_weight(const ManifoldProfile& profile, double r);
double log_strichartz_weight(const ManifoldProfile& profile, double r);

struct MorawetzWeights {
  double lap_a;
  double neg_bilap_a;
};

/// Requires r > 0; the r -> 0 caller-side asymptote is (n-1)/r and
/// (n-1)(n-3)/r^3.
MorawetzWeights morawetz_weights(const ManifoldProfile& profile, double r);

struct EffectivePotential {
  double V;      // tilde-u form, bounded at r = 0
  double V_eff;  // w form, = V + (n-1)(n-3)/(4 r^2)
  double r2V;    // r^2 * V, monitors the O(r^-2) decay for finite k
};

EffectivePotential effective_potential(const ManifoldProfile& profile, double r);

GeometryAtPoint geometry_at(const ManifoldProfile& profile, double r);

/// Surface measure of the unit sphere S^{n-1}.
double sphere_area(int n);

// --- positivity certificate -------------------------------------------------
//
// Verifies, in exact rational arithmetic, the four facts the Morawetz
// argument rests on for finite k >= 1:
//   (a) phi' ((phi')^2 - phi phi'') > 1
//   (b) phi (phi' phi'' - phi phi''') > 0
//   (c) -Delta^2 a > 0
//   (d) phi' phi'' - phi phi''' equals its explicit positive double sum
//       (the double-precision production series vs the exact product form)
// at every requested radius.  (d) compares the fast floating-point series
// used by morawetz_weights against the exact rational evaluation of the
// defining product; tolerance 1e-10 relative.

struct CertificatePoint {
  double r;
  bool pass_a, pass_b, pass_c, pass_d;
  double margin_a;   // phi'((phi')^2 - phi phi'') - 1
  double margin_b;   // phi (phi' phi'' - phi phi''')
  double margin_c;   // -Delta^2 a
  double margin_d;   // 1e-10 - |relative error| of the series route
  bool all_pass() const { return pass_a && pass_b && pass_c && pass_d; }
};

struct CertificateReport {
  ManifoldProfile profile;
  std::vector<CertificatePoint> points;
  bool all_pass = true;
  double worst_margin_a = std::numeric_limits<double>::infinity();
  double worst_margin_b = std::numeric_limits<double>::infinity();
  double worst_margin_c = std::numeric_limits<double>::infinity();
  double worst_margin_d = std::numeric_limits<double>::infinity();
};

CertificateReport positivity_certificate(const ManifoldProfile& profile,
                                         std::span<const double> r_grid);

}  // namespace warpnls
