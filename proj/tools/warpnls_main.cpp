#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "warpnls/harness.hpp"

using nlohmann::json;
using namespace warpnls;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

int cmd_run(const std::string& config_path, std::string out_dir) {
  out_dir = env_or("WARPNLS_OUT", out_dir);
  ExperimentConfig cfg;
  try {
    cfg = ExperimentConfig::parse_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  RunResult res = run_experiment(cfg, out_dir);
  if (!res.error.empty()) std::cerr << "run: " << res.error << '\n';
  for (const auto& v : res.violations) std::cerr << "invariant violation: " << v << '\n';
  std::cout << "report written to " << out_dir << "/report.json (exit " << res.exit_code
            << ")\n";
  return res.exit_code;
}

int cmd_sweep(const std::string& config_path, std::string out_dir, int workers) {
  out_dir = env_or("WARPNLS_OUT", out_dir);
  if (const char* w = std::getenv("WARPNLS_WORKERS")) workers = std::atoi(w);
  SweepSpec spec;
  try {
    spec = SweepSpec::parse_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "sweep config error: " << e.what() << '\n';
    return kExitBadConfig;
  }
  int rc = run_sweep(spec, out_dir, workers);
  std::cout << "summary written to " << out_dir << "/summary.csv\n";
  return rc;
}

int cmd_verify_geometry(const std::string& grid_path, std::string out_path) {
  GeometryVerifySpec spec;
  if (!grid_path.empty()) {
    std::ifstream is(grid_path);
    if (!is) {
      std::cerr << "cannot open grid spec " << grid_path << '\n';
      return kExitBadConfig;
    }
    spec.ns.clear();
    spec.ks.clear();
    std::string line;
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::string key, eq;
      if (!(ls >> key >> eq) || eq != "=") continue;
      std::string rest;
      std::getline(ls, rest);
      std::stringstream vs(rest);
      std::string item;
      if (key == "n") {
        while (std::getline(vs, item, ',')) spec.ns.push_back(std::stoi(item));
      } else if (key == "k") {
        while (std::getline(vs, item, ',')) spec.ks.push_back(std::stoi(item));
      } else if (key == "r_min") {
        spec.r_min = std::stod(rest);
      } else if (key == "r_max") {
        spec.r_max = std::stod(rest);
      } else if (key == "r_points") {
        spec.r_points = static_cast<std::size_t>(std::stol(rest));
      } else {
        std::cerr << "unknown grid spec key: " << key << '\n';
        return kExitBadConfig;
      }
    }
    if (spec.ns.empty() || spec.ks.empty()) {
      std::cerr << "grid spec must list n and k values\n";
      return kExitBadConfig;
    }
  }
  auto outcome = verify_geometry(spec, out_path);
  if (outcome.failures.empty()) {
    std::cout << "verify-geometry: all " << spec.ns.size() * spec.ks.size()
              << " profiles pass (certificate " << out_path << ")\n";
    if (spec.ns.empty()) std::cout << "warning: empty grid, trivial pass\n";
    return 0;
  }
  for (const auto& f : outcome.failures) std::cerr << "FAIL " << f << '\n';
  return 1;
}

int cmd_exponents(int n, const std::string& k_str, double sigma) {
  json j;
  try {
    ExponentResult res;
    if (k_str == "inf") {
      res = solve_exponents_hyperbolic(n, sigma);
      j["system"] = "hyperbolic";
    } else {
      res = solve_exponents_M(n, std::stoi(k_str), sigma);
      j["system"] = "M";
      j["N"] = ManifoldProfile(n, std::stoi(k_str)).scattering_dimension();
    }
    j["n"] = n;
    j["k"] = k_str;
    j["sigma"] = sigma;
    j["status"] = to_string(res.status);
    if (res.solution) {
      const auto& s = *res.solution;
      j["solution"] = {{"alpha", s.alpha}, {"p", s.p},     {"q", s.q},
                       {"theta", s.theta}, {"sigma", s.sigma},
                       {"integrability_margin", s.integrability_margin},
                       {"min_margin", s.min_margin}};
      if (s.a) j["solution"]["a"] = *s.a;
    } else {
      j["certificate"] = res.detail;
    }
  } catch (const std::exception& e) {
    std::cerr << "exponents: " << e.what() << '\n';
    return kExitBadConfig;
  }
  std::cout << j.dump(2) << '\n';
  return j["status"] == "FEASIBLE" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warpnls: radial NLS laboratory on sinh-truncated rotationally "
               "symmetric manifolds"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", grid_path,
              cert_path = "geometry_certificate.json";
  int workers = 1;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", config_path, "experiment config (key = value lines)")
      ->required();
  run->add_option("--out", out_dir, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run an (n, k, sigma) sweep");
  sweep->add_option("--config", config_path, "sweep config")->required();
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--workers", workers, "worker pool size");

  auto* verify = app.add_subcommand("verify-geometry",
                                    "positivity certificate over an (n, k, r) grid");
  verify->add_option("--grid", grid_path, "grid spec file (default: n 4..8, k 1..6)");
  verify->add_option("--out", cert_path, "certificate JSON path");

  auto* expo = app.add_subcommand("exponents", "solve the Strichartz exponent system");
  int n = 4;
  std::string k_str = "inf";
  double sigma = 0.4;
  expo->add_option("--n", n, "dimension")->required();
  expo->add_option("--k", k_str, "interpolation index or 'inf'")->required();
  expo->add_option("--sigma", sigma, "nonlinearity power")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(config_path, out_dir);
  if (sweep->parsed()) return cmd_sweep(config_path, out_dir, workers);
  if (verify->parsed()) return cmd_verify_geometry(grid_path, cert_path);
  if (expo->parsed()) return cmd_exponents(n, k_str, sigma);
  return 0;
}
