#include "warpnls/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace warpnls {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += fmt(xs[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (kv.count(key))
      throw ConfigError("duplicate key '" + key + "' at line " + std::to_string(lineno));
    kv[key] = val;
  }

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("profile.n")) cfg.n = static_cast<int>(parse_int("profile.n", *v));
  if (auto v = take("profile.k")) {
    if (*v == "inf")
      cfg.k = ManifoldProfile::kHyperbolic;
    else
      cfg.k = static_cast<int>(parse_int("profile.k", *v));
  }
  if (auto v = take("sigma")) cfg.sigma = parse_double("sigma", *v);
  if (auto v = take("mode")) cfg.mode = *v;
  if (auto v = take("grid.r_max")) cfg.r_max = parse_double("grid.r_max", *v);
  if (auto v = take("grid.m")) cfg.m = static_cast<std::size_t>(parse_int("grid.m", *v));
  if (auto v = take("time.dt")) cfg.dt = parse_double("time.dt", *v);
  if (auto v = take("time.t_final")) cfg.t_final = parse_double("time.t_final", *v);
  if (auto v = take("time.sample_every")) cfg.sample_every = parse_double("time.sample_every", *v);
  if (auto v = take("data.kind")) cfg.data_kind = *v;
  if (auto v = take("data.amplitude")) cfg.amplitude = parse_double("data.amplitude", *v);
  if (auto v = take("data.width")) cfg.width = parse_double("data.width", *v);
  if (auto v = take("data.center")) cfg.center = parse_double("data.center", *v);
  if (auto v = take("diag.morawetz")) cfg.diag_morawetz = parse_bool("diag.morawetz", *v);
  if (auto v = take("diag.virial")) cfg.diag_virial = parse_bool("diag.virial", *v);
  if (auto v = take("diag.defect")) cfg.diag_defect = parse_bool("diag.defect", *v);
  if (auto v = take("diag.profile")) cfg.diag_profile = parse_bool("diag.profile", *v);
  if (auto v = take("diag.phase")) cfg.diag_phase = parse_bool("diag.phase", *v);
  if (auto v = take("diag.longrange")) cfg.diag_longrange = parse_bool("diag.longrange", *v);
  if (auto v = take("diag.defect_times")) cfg.defect_times = parse_list("diag.defect_times", *v);
  if (auto v = take("diag.profile_times")) cfg.profile_times = parse_list("diag.profile_times", *v);
  if (auto v = take("diag.rho_min")) cfg.rho_min = parse_double("diag.rho_min", *v);
  if (auto v = take("diag.rho_max")) cfg.rho_max = parse_double("diag.rho_max", *v);
  if (auto v = take("diag.rho_points"))
    cfg.rho_points = static_cast<std::size_t>(parse_int("diag.rho_points", *v));
  if (auto v = take("diag.phase_fit_min")) cfg.phase_fit_min = parse_double("diag.phase_fit_min", *v);
  if (auto v = take("diag.phase_fit_max")) cfg.phase_fit_max = parse_double("diag.phase_fit_max", *v);
  if (auto v = take("diag.longrange_fit_start"))
    cfg.longrange_fit_start = parse_double("diag.longrange_fit_start", *v);
  if (auto v = take("diag.psi_center")) cfg.psi_center = parse_double("diag.psi_center", *v);
  if (auto v = take("diag.psi_width")) cfg.psi_width = parse_double("diag.psi_width", *v);
  if (auto v = take("solver_tol")) cfg.solver_tol = parse_double("solver_tol", *v);
  if (auto v = take("leak_threshold")) cfg.leak_threshold = parse_double("leak_threshold", *v);
  if (auto v = take("domain.xi_max")) cfg.xi_max = parse_double("domain.xi_max", *v);
  if (auto v = take("limits.max_node_steps"))
    cfg.max_node_steps = parse_double("limits.max_node_steps", *v);
  if (auto v = take("checkpoint.every")) cfg.checkpoint_every = parse_double("checkpoint.every", *v);
  if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  if (auto v = take("output.dir")) cfg.output_dir = *v;

  if (!kv.empty()) {
    std::string unknown;
    for (const auto& [key, _] : kv) unknown += (unknown.empty() ? "" : ", ") + key;
    throw ConfigError("unknown key(s): " + unknown);
  }

  // defaults that depend on other fields; the dyadic defect ladder is
  // snapped onto the sampling grid
  if (cfg.defect_times.empty()) {
    for (double f : {0.125, 0.25, 0.5, 1.0}) {
      double t = std::max(cfg.sample_every,
                          std::round(f * cfg.t_final / cfg.sample_every) * cfg.sample_every);
      if (cfg.defect_times.empty() || t > cfg.defect_times.back())
        cfg.defect_times.push_back(t);
    }
  }
  if (cfg.profile_times.empty()) {
    double half = std::max(cfg.sample_every,
                           std::round(0.5 * cfg.t_final / cfg.sample_every) * cfg.sample_every);
    cfg.profile_times = {half};
    if (cfg.t_final > half) cfg.profile_times.push_back(cfg.t_final);
  }
  if (cfg.phase_fit_min == 0.0) cfg.phase_fit_min = cfg.t_final / 3.0;
  if (cfg.phase_fit_max == 0.0) cfg.phase_fit_max = cfg.t_final;
  if (cfg.longrange_fit_start == 0.0) cfg.longrange_fit_start = cfg.t_final / 4.0;

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

double ExperimentConfig::data_extent() const {
  if (data_kind == "gaussian") return width * std::sqrt(2.0 * std::log(1e8));
  if (data_kind == "bump") return center + width;
  return 0.0;  // zero data
}

double ExperimentConfig::bandwidth() const {
  if (xi_max > 0.0) return xi_max;
  double h = r_max / static_cast<double>(m + 1);
  double nyquist = std::numbers::pi / h;
  double data_bw;
  if (data_kind == "gaussian")
    data_bw = 4.0 / width;
  else if (data_kind == "bump")
    data_bw = 8.0 / width;
  else
    data_bw = 0.0;
  return std::min(nyquist, data_bw);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };

  if (n < 2) fail("profile.n: must be >= 2");
  if (k != ManifoldProfile::kHyperbolic && k < 0) fail("profile.k: must be >= 0 or 'inf'");
  if (mode != "nonlinear" && mode != "free") fail("mode: must be 'nonlinear' or 'free'");
  if (mode == "nonlinear") {
    if (n < 4)
      fail("profile.n: dynamics experiments require n >= 4");
    double upper = 2.0 / (n - 2.0);
    if (!(sigma > 0.0) || !(sigma < upper)) {
      std::ostringstream os;
      os << "sigma: nonlinear runs require 0 < sigma < 2/(n-2) = " << upper
         << " strictly (the asymptotic-completeness range; for finite k the "
            "scattering regime additionally needs sigma > 2/N)";
      fail(os.str());
    }
  }
  if (!(r_max > 0.0)) fail("grid.r_max: must be > 0");
  if (m < 8) fail("grid.m: must be >= 8");
  if (!(dt > 0.0)) fail("time.dt: must be > 0");
  if (!(t_final > 0.0)) fail("time.t_final: must be > 0");
  if (!(sample_every > 0.0)) fail("time.sample_every: must be > 0");
  double ratio = sample_every / dt;
  if (std::abs(ratio - std::lround(ratio)) > 1e-9)
    fail("time.dt: must divide time.sample_every");
  for (double t : defect_times) {
    double q = t / sample_every;
    if (t <= 0.0 || t > t_final + 1e-9 || std::abs(q - std::lround(q)) > 1e-6)
      fail("diag.defect_times: each time must be a positive multiple of "
           "time.sample_every within [0, t_final]");
  }
  for (double t : profile_times) {
    double q = t / sample_every;
    if (t <= 0.0 || t > t_final + 1e-9 || std::abs(q - std::lround(q)) > 1e-6)
      fail("diag.profile_times: each time must be a positive multiple of "
           "time.sample_every within (0, t_final]");
  }
  if (data_kind != "gaussian" && data_kind != "bump" && data_kind != "zero")
    fail("data.kind: must be gaussian, bump, or zero");
  if (amplitude < 0.0) fail("data.amplitude: must be >= 0");
  if (!(width > 0.0)) fail("data.width: must be > 0");
  if (!(solver_tol > 0.0)) fail("solver_tol: must be > 0");
  if (!(leak_threshold > 0.0)) fail("leak_threshold: must be > 0");

  // Domain sizing: signals travel at group velocity 2 xi, so the fastest
  // mode we care about must not reach the boundary before t_final.
  double need = data_extent() + 2.0 * bandwidth() * t_final;
  if (amplitude > 0.0 && r_max < need) {
    std::ostringstream os;
    os << "grid.r_max: " << r_max << " is below the domain-sizing rule "
       << "r_data + 2 xi_max t_final = " << need
       << " (xi_max = " << bandwidth() << "); enlarge r_max, shorten t_final, "
       << "or cap domain.xi_max explicitly";
    fail(os.str());
  }

  double node_steps = static_cast<double>(m) * (t_final / dt);
  if (node_steps > max_node_steps) {
    std::ostringstream os;
    os << "limits.max_node_steps: run needs " << node_steps << " node-steps, ceiling is "
       << max_node_steps;
    fail(os.str());
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("profile.n", std::to_string(n));
  out.emplace_back("profile.k", k == ManifoldProfile::kHyperbolic ? "inf" : std::to_string(k));
  out.emplace_back("sigma", fmt(sigma));
  out.emplace_back("mode", mode);
  out.emplace_back("grid.r_max", fmt(r_max));
  out.emplace_back("grid.m", std::to_string(m));
  out.emplace_back("time.dt", fmt(dt));
  out.emplace_back("time.t_final", fmt(t_final));
  out.emplace_back("time.sample_every", fmt(sample_every));
  out.emplace_back("data.kind", data_kind);
  out.emplace_back("data.amplitude", fmt(amplitude));
  out.emplace_back("data.width", fmt(width));
  out.emplace_back("data.center", fmt(center));
  out.emplace_back("diag.morawetz", diag_morawetz ? "true" : "false");
  out.emplace_back("diag.virial", diag_virial ? "true" : "false");
  out.emplace_back("diag.defect", diag_defect ? "true" : "false");
  out.emplace_back("diag.profile", diag_profile ? "true" : "false");
  out.emplace_back("diag.phase", diag_phase ? "true" : "false");
  out.emplace_back("diag.longrange", diag_longrange ? "true" : "false");
  out.emplace_back("diag.defect_times", fmt_list(defect_times));
  out.emplace_back("diag.profile_times", fmt_list(profile_times));
  out.emplace_back("diag.rho_min", fmt(rho_min));
  out.emplace_back("diag.rho_max", fmt(rho_max));
  out.emplace_back("diag.rho_points", std::to_string(rho_points));
  out.emplace_back("diag.phase_fit_min", fmt(phase_fit_min));
  out.emplace_back("diag.phase_fit_max", fmt(phase_fit_max));
  out.emplace_back("diag.longrange_fit_start", fmt(longrange_fit_start));
  out.emplace_back("diag.psi_center", fmt(psi_center));
  out.emplace_back("diag.psi_width", fmt(psi_width));
  out.emplace_back("solver_tol", fmt(solver_tol));
  out.emplace_back("leak_threshold", fmt(leak_threshold));
  out.emplace_back("domain.xi_max", fmt(bandwidth()));
  out.emplace_back("limits.max_node_steps", fmt(max_node_steps));
  out.emplace_back("checkpoint.every", fmt(checkpoint_every));
  out.emplace_back("seed", std::to_string(seed));
  out.emplace_back("output.dir", output_dir);
  return out;
}

}  // namespace warpnls
