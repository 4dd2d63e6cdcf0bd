#include "warpnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

namespace warpnls {

RadialGrid::RadialGrid(ManifoldProfile profile, double r_max, std::size_t m)
    : profile_(profile), r_max_(r_max), m_(m) {
  if (!(r_max > 0.0)) throw std::invalid_argument("RadialGrid: r_max must be > 0");
  if (m < 8) throw std::invalid_argument("RadialGrid: need at least 8 interior nodes");
  h_ = r_max / static_cast<double>(m + 1);
  sphere_ = sphere_area(profile.n());
  const double beta = (profile.n() - 1) / 2.0;

  nodes_.resize(m);
  phi_.resize(m);
  log_phi_.resize(m);
  phi_beta_.resize(m);
  r_beta_.resize(m);
  v_eff_.resize(m);
  log_strichartz_w_.resize(m);
  morawetz_w_.resize(m);
  ratio_up_.resize(m);
  ratio_dn_.resize(m);

  for (std::size_t i = 0; i < m; ++i) {
    double r = h_ * static_cast<double>(i + 1);
    nodes_[i] = r;
    // log phi = log r + log(phi/r); the second factor is the stable one
    log_phi_[i] = std::log(r) + log_strichartz_weight(profile, r) / beta;
    phi_[i] = phi_eval(profile, r).phi;
    phi_beta_[i] = std::exp(beta * log_phi_[i]);
    if (std::isinf(phi_beta_[i]))
      throw std::invalid_argument(
          "RadialGrid: phi^((n-1)/2) overflows at r_max for this profile; "
          "shrink r_max");
    r_beta_[i] = std::exp(beta * std::log(r));  // same form as phi_beta so k=0 collapses exactly
    v_eff_[i] = effective_potential(profile, r).V_eff;
    log_strichartz_w_[i] = log_strichartz_weight(profile, r);
    morawetz_w_[i] = morawetz_weights(profile, r).neg_bilap_a;
  }
  for (std::size_t i = 0; i < m; ++i) {
    ratio_up_[i] = (i + 1 < m) ? std::exp(beta * (log_phi_[i] - log_phi_[i + 1])) : 0.0;
    ratio_dn_[i] = (i > 0) ? std::exp(beta * (log_phi_[i] - log_phi_[i - 1])) : 0.0;
  }
}

Representations representations(const FieldState& state) {
  const auto& g = *state.grid;
  Representations out;
  out.u.resize(state.size());
  out.u_tilde.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    out.u[i] = state.w[i] / g.phi_beta()[i];
    out.u_tilde[i] = state.w[i] / g.r_beta()[i];
  }
  return out;
}

std::vector<Complex> u_values(const FieldState& state) {
  const auto& g = *state.grid;
  std::vector<Complex> u(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) u[i] = state.w[i] / g.phi_beta()[i];
  return u;
}

double mass(const FieldState& state) {
  const auto& g = *state.grid;
  double acc = 0.0;
  for (const Complex& w : state.w) acc += std::norm(w);
  return g.sphere() * acc * g.h();
}

std::vector<Complex> scaled_gradient(const FieldState& state) {
  // phi_i^beta D(u)_i written with the bounded neighbour ratios:
  //   (w_{i+1} rho_i^+ - w_{i-1} rho_i^-) / 2h,  rho_i^+- = (phi_i/phi_{i+-1})^beta
  // centered in the interior, one-sided at the ends.
  const auto& g = *state.grid;
  const std::size_t m = state.size();
  std::vector<Complex> gw(m);
  if (m < 2) return gw;
  const double h = g.h();
  gw[0] = (state.w[1] * g.ratio_up()[0] - state.w[0]) / h;
  for (std::size_t i = 1; i + 1 < m; ++i)
    gw[i] = (state.w[i + 1] * g.ratio_up()[i] - state.w[i - 1] * g.ratio_dn()[i]) / (2.0 * h);
  gw[m - 1] = (state.w[m - 1] - state.w[m - 2] * g.ratio_dn()[m - 1]) / h;
  return gw;
}

double h1_norm(const FieldState& state) {
  const auto& g = *state.grid;
  auto gw = scaled_gradient(state);
  double grad = 0.0;
  for (const Complex& v : gw) grad += std::norm(v);
  return std::sqrt(mass(state) + g.sphere() * grad * g.h());
}

double energy(const FieldState& state, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("energy: requires sigma > 0");
  const auto& g = *state.grid;
  const double beta = (g.profile().n() - 1) / 2.0;
  auto gw = scaled_gradient(state);
  double acc = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    double aw = std::abs(state.w[i]);
    // |u|^(2 sigma + 2) phi^(n-1) = |w|^2 |u|^(2 sigma), evaluated in logs so
    // the underflow at large r is graceful
    double pot = 0.0;
    if (aw > 0.0)
      pot = aw * aw * std::exp(2.0 * sigma * (std::log(aw) - beta * g.log_phi()[i])) /
            (sigma + 1.0);
    acc += std::norm(gw[i]) + pot;
  }
  return g.sphere() * acc * g.h();
}

double linf_u(const FieldState& state) {
  const auto& g = *state.grid;
  double best = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    best = std::max(best, std::abs(state.w[i]) / g.phi_beta()[i]);
  return best;
}

double weighted_lq_norm(const FieldState& state, double q) {
  if (!(q >= 2.0)) throw std::domain_error("weighted_lq_norm: requires q >= 2");
  const auto& g = *state.grid;
  const int n = g.profile().n();
  const double beta = (n - 1) / 2.0;
  // log-sum-exp over  q log|u_i| + (q-2) log w_n + (n-1) log phi
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    double aw = std::abs(state.w[i]);
    if (aw == 0.0) {
      logs.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    double log_u = std::log(aw) - beta * g.log_phi()[i];
    double lt = q * log_u + (q - 2.0) * g.log_strichartz_w()[i] + (n - 1) * g.log_phi()[i];
    logs.push_back(lt);
    max_log = std::max(max_log, lt);
  }
  if (std::isinf(max_log)) return 0.0;
  double acc = 0.0;
  for (double lt : logs)
    if (!std::isinf(lt)) acc += std::exp(lt - max_log);
  double log_sum = max_log + std::log(acc) + std::log(g.h()) + std::log(g.sphere());
  return std::exp(log_sum / q);
}

FieldState gaussian_data(GridPtr grid, double amplitude, double width) {
  if (amplitude < 0.0) throw std::invalid_argument("gaussian_data: amplitude must be >= 0");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_data: width must be > 0");
  if (width > grid->r_max() / 8.0)
    throw std::invalid_argument("gaussian_data: width > r_max/8 would touch the boundary");
  const double beta = (grid->profile().n() - 1) / 2.0;
  FieldState st;
  st.t = 0.0;
  st.grid = grid;
  st.w.resize(grid->m());
  for (std::size_t i = 0; i < grid->m(); ++i) {
    double r = grid->nodes()[i];
    double log_w = -r * r / (2.0 * width * width) + beta * grid->log_phi()[i];
    st.w[i] = Complex(amplitude * std::exp(log_w), 0.0);
  }
  return st;
}

double bump_value(double r, double center, double width) {
  double x = (r - center) / width;
  if (std::abs(x) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - x * x));
}

FieldState bump_data(GridPtr grid, double amplitude, double center, double width) {
  if (!(width > 0.0) || !(center > 0.0))
    throw std::invalid_argument("bump_data: needs center > 0, width > 0");
  if (center + width > grid->r_max() * 0.875)
    throw std::invalid_argument("bump_data: support too close to the boundary");
  FieldState st;
  st.t = 0.0;
  st.grid = grid;
  st.w.resize(grid->m());
  for (std::size_t i = 0; i < grid->m(); ++i) {
    double u = amplitude * bump_value(grid->nodes()[i], center, width);
    st.w[i] = (u == 0.0) ? Complex(0.0, 0.0) : Complex(u * grid->phi_beta()[i], 0.0);
  }
  return st;
}

// --- serialization ----------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'W', 'N', 'L', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("load_state: truncated record");
  return v;
}
}  // namespace

void save_state(const FieldState& state, std::ostream& os) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(state.grid->profile().n()));
  put(os, static_cast<std::int32_t>(state.grid->profile().k()));
  put(os, static_cast<std::uint64_t>(state.size()));
  put(os, state.grid->r_max());
  put(os, state.t);
  for (const Complex& w : state.w) {
    put(os, w.real());
    put(os, w.imag());
  }
}

FieldState load_state(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_state: bad magic");
  auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("load_state: unsupported version");
  auto n = get<std::int32_t>(is);
  auto k = get<std::int32_t>(is);
  auto m = get<std::uint64_t>(is);
  auto r_max = get<double>(is);
  auto t = get<double>(is);
  FieldState st;
  st.grid = std::make_shared<RadialGrid>(ManifoldProfile(n, k), r_max,
                                         static_cast<std::size_t>(m));
  st.t = t;
  st.w.resize(static_cast<std::size_t>(m));
  for (auto& w : st.w) {
    double re = get<double>(is);
    double im = get<double>(is);
    w = Complex(re, im);
  }
  return st;
}

void save_state_file(const FieldState& state, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_state_file: cannot open " + path);
  save_state(state, os);
}

FieldState load_state_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_state_file: cannot open " + path);
  return load_state(is);
}

void write_state_csv(const FieldState& state, std::ostream& os) {
  os << "r,re_w,im_w,abs_u\n";
  char buf[160];
  for (std::size_t i = 0; i < state.size(); ++i) {
    double au = std::abs(state.w[i]) / state.grid->phi_beta()[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", state.grid->nodes()[i],
                  state.w[i].real(), state.w[i].imag(), au);
    os << buf;
  }
}

}  // namespace warpnls
