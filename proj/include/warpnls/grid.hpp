#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "warpnls/geometry.hpp"

// Uniform half-line grid and field states in the reduced w-representation,
// w = phi^((n-1)/2) u.  Both endpoints r = 0 and r = r_max are Dirichlet
// and excluded from the node set; with w vanishing there, the interior sum
// times h is the full trapezoid rule.  All geometric arrays are precomputed
// once per grid and shared read-only.

namespace warpnls {

using Complex = std::complex<double>;

class RadialGrid {
public:
  RadialGrid(ManifoldProfile profile, double r_max, std::size_t m);

  const ManifoldProfile& profile() const { return profile_; }
  double r_max() const { return r_max_; }
  std::size_t m() const { return m_; }
  double h() const { return h_; }
  double sphere() const { return sphere_; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> phi() const { return phi_; }
  std::span<const double> log_phi() const { return log_phi_; }
  std::span<const double> phi_beta() const { return phi_beta_; }      // phi^((n-1)/2)
  std::span<const double> r_beta() const { return r_beta_; }          // r^((n-1)/2)
  std::span<const double> v_eff() const { return v_eff_; }
  std::span<const double> log_strichartz_w() const { return log_strichartz_w_; }
  std::span<const double> morawetz_w() const { return morawetz_w_; }  // -Delta^2 a
  // exp(beta (log phi_i - log phi_{i +/- 1})): lets gradient quadratures run
  // in w-variables where phi^(n-1) would overflow on hyperbolic grids
  std::span<const double> ratio_up() const { return ratio_up_; }
  std::span<const double> ratio_dn() const { return ratio_dn_; }

private:
  ManifoldProfile profile_;
  double r_max_;
  std::size_t m_;
  double h_;
  double sphere_;
  std::vector<double> nodes_, phi_, log_phi_, phi_beta_, r_beta_;
  std::vector<double> v_eff_, log_strichartz_w_, morawetz_w_;
  std::vector<double> ratio_up_, ratio_dn_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

struct FieldState {
  double t = 0.0;
  std::vector<Complex> w;
  GridPtr grid;

  std::size_t size() const { return w.size(); }
};

struct Representations {
  std::vector<Complex> u;        // u_i = w_i / phi^beta
  std::vector<Complex> u_tilde;  // w_i / r^beta
};

Representations representations(const FieldState& state);

/// u-samples only (the common case).
std::vector<Complex> u_values(const FieldState& state);

double mass(const FieldState& state);
double h1_norm(const FieldState& state);
double energy(const FieldState& state, double sigma);
double linf_u(const FieldState& state);

/// phi^beta times the radial derivative of u, a bounded quantity even where
/// phi^beta itself overflows; |.|^2 summed is the H1 gradient term.
std::vector<Complex> scaled_gradient(const FieldState& state);

/// L^q norm of u against the weight w_n^(q-2) and the measure
/// phi^(n-1) dr |S^(n-1)|, log-space per term.  Requires q >= 2.
double weighted_lq_norm(const FieldState& state, double q);

/// u(0, r) = A exp(-r^2 / (2 s^2)), converted to w.  Rejects s > r_max/8.
FieldState gaussian_data(GridPtr grid, double amplitude, double width);

/// C-infinity bump in u, supported on [center - width, center + width].
FieldState bump_data(GridPtr grid, double amplitude, double center, double width);

/// Smooth compactly supported bump value (used for test functions too).
double bump_value(double r, double center, double width);

// --- serialization ---------------------------------------------------------
// Flat binary record: magic "WNLS", u32 version, i32 n, i32 k (-1 = inf),
// u64 m, f64 r_max, f64 t, then m interleaved (re, im) f64 pairs.

void save_state(const FieldState& state, std::ostream& os);
FieldState load_state(std::istream& is);
void save_state_file(const FieldState& state, const std::string& path);
FieldState load_state_file(const std::string& path);

/// Two-column (r, Re w, Im w, |u|) CSV for plotting.
void write_state_csv(const FieldState& state, std::ostream& os);

}  // namespace warpnls
