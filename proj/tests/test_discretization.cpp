#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "warpnls/grid.hpp"

using namespace warpnls;
using Float50 = boost::multiprecision::cpp_bin_float_50;

namespace {

GridPtr make_grid(int n, int k, double r_max, std::size_t m) {
  return std::make_shared<RadialGrid>(ManifoldProfile(n, k), r_max, m);
}

FieldState random_state(GridPtr grid, unsigned seed, double amp = 1.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FieldState st;
  st.grid = grid;
  st.w.resize(grid->m());
  for (std::size_t i = 0; i < st.w.size(); ++i) {
    double env = std::exp(-std::pow(grid->nodes()[i] - 3.0, 2));
    st.w[i] = amp * env * Complex(gauss(rng), gauss(rng));
  }
  return st;
}

}  // namespace

TEST_CASE("grid construction and reproducibility") {
  auto g1 = make_grid(4, 1, 30.0, 512);
  auto g2 = make_grid(4, 1, 30.0, 512);
  CHECK(g1->h() == 30.0 / 513.0);
  CHECK(g1->nodes().front() == g1->h());
  CHECK(g1->nodes().back() < 30.0);
  // precomputed arrays bitwise reproducible from (profile, r_max, m)
  for (std::size_t i = 0; i < g1->m(); ++i) {
    CHECK(g1->v_eff()[i] == g2->v_eff()[i]);
    CHECK(g1->morawetz_w()[i] == g2->morawetz_w()[i]);
    CHECK(g1->phi_beta()[i] == g2->phi_beta()[i]);
  }
  CHECK_THROWS_AS(RadialGrid(ManifoldProfile(4, 0), -1.0, 64), std::invalid_argument);
  CHECK_THROWS_AS(RadialGrid(ManifoldProfile(4, 0), 10.0, 2), std::invalid_argument);
}

TEST_CASE("representations: euclidean and round trip") {
  auto grid = make_grid(4, 0, 20.0, 256);
  auto st = random_state(grid, 11);
  auto rep = representations(st);
  for (std::size_t i = 0; i < st.size(); ++i) {
    // k = 0: u_tilde = u and w = r^{3/2} u
    CHECK(rep.u[i] == rep.u_tilde[i]);
    double rb = std::pow(grid->nodes()[i], 1.5);
    CHECK(std::abs(rep.u[i] * rb - st.w[i]) <= 1e-13 * std::abs(st.w[i]));
  }

  // round trip u -> w -> u on a curved profile
  auto grid2 = make_grid(5, 2, 20.0, 256);
  auto st2 = random_state(grid2, 12);
  auto u = u_values(st2);
  for (std::size_t i = 0; i < st2.size(); ++i) {
    Complex w_back = u[i] * grid2->phi_beta()[i];
    CHECK(std::abs(w_back - st2.w[i]) <= 4e-16 * std::abs(st2.w[i]));
  }
}

TEST_CASE("zero state maps to zero everywhere") {
  auto grid = make_grid(4, 1, 20.0, 128);
  FieldState st;
  st.grid = grid;
  st.w.assign(grid->m(), Complex(0, 0));
  CHECK(mass(st) == 0.0);
  CHECK(h1_norm(st) == 0.0);
  CHECK(energy(st, 0.5) == 0.0);
  CHECK(weighted_lq_norm(st, 4.0) == 0.0);
  auto rep = representations(st);
  for (auto& z : rep.u) CHECK(z == Complex(0, 0));
}

TEST_CASE("mass: impulse and closed-form gaussian") {
  auto grid = make_grid(4, 1, 20.0, 200);
  FieldState st;
  st.grid = grid;
  st.w.assign(grid->m(), Complex(0, 0));
  st.w[17] = Complex(1.0, 0.0);
  CHECK(mass(st) == doctest::Approx(sphere_area(4) * grid->h()).epsilon(1e-15));

  // k=0, n=4, A=1, s=1: mass = 2 pi^2 int e^{-r^2} r^3 dr = pi^2
  auto eg = make_grid(4, 0, 40.0, 4096);
  auto gs = gaussian_data(eg, 1.0, 1.0);
  CHECK(mass(gs) ==
        doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-6));

  // mass scales as A^2 exactly
  auto g2 = gaussian_data(eg, 2.0, 1.0);
  CHECK(mass(g2) == doctest::Approx(4.0 * mass(gs)).epsilon(1e-15));
}

TEST_CASE("mass representation invariance") {
  // same quantity summed against |u|^2 phi^{n-1}
  auto grid = make_grid(5, ManifoldProfile::kHyperbolic, 25.0, 300);
  auto st = random_state(grid, 3);
  auto u = u_values(st);
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += std::norm(u[i]) * std::exp((grid->profile().n() - 1) * grid->log_phi()[i]);
  double m_u = acc * grid->h() * grid->sphere();
  CHECK(m_u == doctest::Approx(mass(st)).epsilon(1e-12));
}

TEST_CASE("quadrature second-order convergence (Richardson over m, 2m, 4m)") {
  // smooth annular data on a curved profile; the truth from the finest level
  double errs[3];
  std::size_t ms[3] = {256, 512, 1024};
  double ref;
  {
    auto gfine = make_grid(4, 1, 24.0, 16384);
    ref = h1_norm(bump_data(gfine, 1.0, 8.0, 3.0));
  }
  for (int l = 0; l < 3; ++l) {
    auto g = make_grid(4, 1, 24.0, ms[l]);
    errs[l] = std::abs(h1_norm(bump_data(g, 1.0, 8.0, 3.0)) - ref);
  }
  CHECK(errs[0] / errs[1] > 3.0);
  CHECK(errs[1] / errs[2] > 3.0);
}

TEST_CASE("weighted Lq norm") {
  auto grid = make_grid(4, 0, 20.0, 512);
  auto st = random_state(grid, 21);
  SUBCASE("q = 2 equals sqrt(mass)") {
    CHECK(weighted_lq_norm(st, 2.0) == doctest::Approx(std::sqrt(mass(st))).epsilon(1e-12));
  }
  SUBCASE("k = 0 is the plain radial L^q norm") {
    double q = 3.0;
    auto u = u_values(st);
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      acc += std::pow(std::abs(u[i]), q) * std::pow(grid->nodes()[i], 3);
    double want = std::pow(acc * grid->h() * grid->sphere(), 1.0 / q);
    CHECK(weighted_lq_norm(st, q) == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("q < 2 rejected") {
    CHECK_THROWS_AS(weighted_lq_norm(st, 1.5), std::domain_error);
  }
  SUBCASE("monotone in pointwise |u|") {
    auto grid2 = make_grid(4, 2, 20.0, 256);
    auto a = random_state(grid2, 5);
    auto b = a;
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto& z : b.w) z *= unif(rng);  // pointwise dominated
    for (double q : {2.0, 2.5, 4.0, 7.0})
      CHECK(weighted_lq_norm(b, q) <= weighted_lq_norm(a, q) * (1 + 1e-12));
  }
}

TEST_CASE("weighted Lq norm vs high-precision evaluation of the same sum") {
  // hyperbolic profile, bump supported on [5, 6], q = 4: the double path runs
  // in log space; the reference evaluates the identical trapezoid sum in
  // 50-digit arithmetic with w_n and phi^{n-1} formed directly.
  auto grid = make_grid(4, ManifoldProfile::kHyperbolic, 40.0, 2048);
  auto st = bump_data(grid, 1.3, 5.5, 0.5);
  const double q = 4.0;
  Float50 acc = 0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    double au = std::abs(st.w[i]) / grid->phi_beta()[i];
    if (au == 0.0) continue;
    Float50 r(grid->nodes()[i]);
    Float50 sh = sinh(r);
    Float50 wn = pow(sh / r, Float50(1.5));
    acc += pow(Float50(au), q) * pow(wn, q - 2) * pow(sh, 3);
  }
  Float50 want = pow(acc * Float50(grid->h()) * Float50(grid->sphere()), Float50(0.25));
  CHECK(weighted_lq_norm(st, q) ==
        doctest::Approx(static_cast<double>(want)).epsilon(1e-8));
}

TEST_CASE("gaussian data guards") {
  auto grid = make_grid(4, 0, 20.0, 128);
  CHECK_THROWS_AS(gaussian_data(grid, 1.0, 3.0), std::invalid_argument);  // s > r_max/8
  CHECK_THROWS_AS(gaussian_data(grid, -1.0, 1.0), std::invalid_argument);
  auto z = gaussian_data(grid, 0.0, 1.0);
  CHECK(mass(z) == 0.0);
}

TEST_CASE("binary state serialization round trip") {
  auto grid = make_grid(5, 2, 20.0, 128);
  auto st = random_state(grid, 31);
  st.t = 7.25;
  std::stringstream buf;
  save_state(st, buf);
  auto back = load_state(buf);
  CHECK(back.t == st.t);
  CHECK(back.size() == st.size());
  CHECK(back.grid->profile() == grid->profile());
  CHECK(back.grid->r_max() == grid->r_max());
  for (std::size_t i = 0; i < st.size(); ++i) CHECK(back.w[i] == st.w[i]);

  std::stringstream bad("not a state");
  CHECK_THROWS_AS(load_state(bad), std::runtime_error);
}

TEST_CASE("csv output has the fixed header") {
  auto grid = make_grid(4, 0, 20.0, 64);
  auto st = gaussian_data(grid, 1.0, 1.0);
  std::ostringstream os;
  write_state_csv(st, os);
  CHECK(os.str().substr(0, 18) == "r,re_w,im_w,abs_u\n");
}
