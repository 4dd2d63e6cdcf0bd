#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

#include "warpnls/harness.hpp"

namespace py = pybind11;
using namespace warpnls;

namespace {

// k arrives from python as an int or the string "inf"
int parse_k(const std::variant<int, std::string>& k) {
  if (std::holds_alternative<int>(k)) return std::get<int>(k);
  const auto& s = std::get<std::string>(k);
  if (s == "inf") return ManifoldProfile::kHyperbolic;
  throw std::invalid_argument("k must be a non-negative int or 'inf'");
}

py::dict solution_dict(const ExponentResult& res) {
  py::dict d;
  d["status"] = to_string(res.status);
  d["detail"] = res.detail;
  if (res.solution) {
    const auto& s = *res.solution;
    py::dict sol;
    sol["alpha"] = s.alpha;
    sol["p"] = s.p;
    sol["q"] = s.q;
    sol["theta"] = s.theta;
    if (s.a) sol["a"] = *s.a;
    sol["sigma"] = s.sigma;
    sol["n"] = s.n;
    sol["N"] = s.N;
    sol["integrability_margin"] = s.integrability_margin;
    sol["min_margin"] = s.min_margin;
    d["solution"] = sol;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radial NLS laboratory on rotationally symmetric manifolds "
            "interpolating between Euclidean and hyperbolic space";

  py::class_<ManifoldProfile>(m, "ManifoldProfile")
      .def(py::init([](int n, std::variant<int, std::string> k) {
             return ManifoldProfile(n, parse_k(k));
           }),
           py::arg("n"), py::arg("k"))
      .def_property_readonly("n", &ManifoldProfile::n)
      .def_property_readonly("k", &ManifoldProfile::k)
      .def_property_readonly("is_hyperbolic", &ManifoldProfile::is_hyperbolic)
      .def("scattering_dimension", &ManifoldProfile::scattering_dimension)
      .def("__repr__",
           [](const ManifoldProfile& p) { return "ManifoldProfile(" + p.label() + ")"; });

  m.def("phi_eval",
        [](const ManifoldProfile& p, double r) {
          PhiJet j = phi_eval(p, r);
          return py::make_tuple(j.phi, j.dphi, j.d2phi, j.d3phi);
        },
        py::arg("profile"), py::arg("r"),
        "phi and its first three derivatives at r");

  m.def("strichartz_weight",
        [](const ManifoldProfile& p, double r) { return strichartz_weight(p, r); },
        py::arg("profile"), py::arg("r"));
  m.def("log_strichartz_weight",
        [](const ManifoldProfile& p, double r) { return log_strichartz_weight(p, r); },
        py::arg("profile"), py::arg("r"));

  m.def("morawetz_weights",
        [](const ManifoldProfile& p, double r) {
          auto w = morawetz_weights(p, r);
          return py::make_tuple(w.lap_a, w.neg_bilap_a);
        },
        py::arg("profile"), py::arg("r"), "(Lap a, -Lap^2 a) at r > 0");

  m.def("effective_potential",
        [](const ManifoldProfile& p, double r) {
          auto v = effective_potential(p, r);
          return py::make_tuple(v.V, v.V_eff, v.r2V);
        },
        py::arg("profile"), py::arg("r"), "(V, V_eff, r^2 V) at r");

  m.def("positivity_certificate",
        [](const ManifoldProfile& p, const std::vector<double>& grid) {
          auto rep = positivity_certificate(p, grid);
          py::dict d;
          d["all_pass"] = rep.all_pass;
          d["worst_margin_a"] = rep.worst_margin_a;
          d["worst_margin_b"] = rep.worst_margin_b;
          d["worst_margin_c"] = rep.worst_margin_c;
          d["worst_margin_d"] = rep.worst_margin_d;
          return d;
        },
        py::arg("profile"), py::arg("r_grid"));

  m.def("is_admissible", &is_admissible, py::arg("n"), py::arg("p"), py::arg("q"));
  m.def("solve_exponents_hyperbolic",
        [](int n, double sigma) { return solution_dict(solve_exponents_hyperbolic(n, sigma)); },
        py::arg("n"), py::arg("sigma"));
  m.def("solve_exponents_M",
        [](int n, int k, double sigma) { return solution_dict(solve_exponents_M(n, k, sigma)); },
        py::arg("n"), py::arg("k"), py::arg("sigma"));
  m.def("bootstrap_threshold", &bootstrap_threshold, py::arg("theta"), py::arg("eps2"));

  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
      .def(py::init([](const ManifoldProfile& p, double r_max, std::size_t m_nodes) {
             return std::make_shared<RadialGrid>(p, r_max, m_nodes);
           }),
           py::arg("profile"), py::arg("r_max"), py::arg("m"))
      .def_property_readonly("h", &RadialGrid::h)
      .def_property_readonly("m", &RadialGrid::m)
      .def_property_readonly("r_max", &RadialGrid::r_max)
      .def_property_readonly("nodes", [](const RadialGrid& g) {
        return std::vector<double>(g.nodes().begin(), g.nodes().end());
      });

  py::class_<FieldState>(m, "FieldState")
      .def_readonly("t", &FieldState::t)
      .def_property_readonly("w", [](const FieldState& s) { return s.w; })
      .def("mass", &mass)
      .def("h1_norm", &h1_norm)
      .def("energy", &energy, py::arg("sigma"))
      .def("linf_u", &linf_u)
      .def("weighted_lq_norm", &weighted_lq_norm, py::arg("q"));

  m.def("gaussian_data",
        [](std::shared_ptr<RadialGrid> g, double amplitude, double width) {
          return gaussian_data(std::move(g), amplitude, width);
        },
        py::arg("grid"), py::arg("amplitude"), py::arg("width"));

  m.def("evolve",
        [](const FieldState& state, double t_final, const std::string& mode, double dt,
           double sigma, double sample_every, double leak_threshold) {
          IntegratorOptions opts;
          opts.dt = dt;
          opts.sigma = sigma;
          opts.leak_threshold = leak_threshold;
          EvolveMode em = mode == "nonlinear" ? EvolveMode::kNonlinear : EvolveMode::kFree;
          Trajectory traj = evolve(state, t_final, em, opts, sample_every);
          return traj;
        },
        py::arg("state"), py::arg("t_final"), py::arg("mode"), py::arg("dt") = 1e-3,
        py::arg("sigma") = 0.0, py::arg("sample_every") = 0.5,
        py::arg("leak_threshold") = 1e-3);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("times",
                             [](const Trajectory& t) {
                               std::vector<double> ts;
                               for (const auto& s : t.snapshots) ts.push_back(s.t);
                               return ts;
                             })
      .def("state_at", &Trajectory::state_at, py::arg("t"))
      .def("scattering_defect",
           [](const Trajectory& t, double t1, double t2) {
             auto d = scattering_defect(t, t1, t2);
             return py::make_tuple(d.defect, d.reliable);
           },
           py::arg("t1"), py::arg("t2"))
      .def("extract_profile",
           [](const Trajectory& t, double at, double rho_min, double rho_max,
              std::size_t points) {
             auto prof = extract_profile(t, at, default_rho_grid(points, rho_min, rho_max));
             py::dict d;
             d["rho"] = prof.rho;
             d["F"] = prof.F;
             d["unitarity_defect"] = prof.unitarity_defect;
             return d;
           },
           py::arg("t"), py::arg("rho_min") = 0.4, py::arg("rho_max") = 8.0,
           py::arg("points") = 400);

  m.def("run_experiment",
        [](const std::string& config_text, const std::string& out) {
          auto cfg = ExperimentConfig::parse(config_text);
          auto res = run_experiment(cfg, out);
          py::dict d;
          d["exit_code"] = res.exit_code;
          d["error"] = res.error;
          d["mass_drift"] = res.mass_drift;
          d["energy_drift"] = res.energy_drift;
          return d;
        },
        py::arg("config_text"), py::arg("out_dir"));
}
