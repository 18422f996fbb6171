#include "ebm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ebm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line) {
  const std::string t = trim(v);
  double out = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size())
    fail(line, "expected a number, got '" + t + "'");
  return out;
}

std::int64_t parse_int(const std::string& v, int line) {
  const std::string t = trim(v);
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc{} || p != t.data() + t.size())
    fail(line, "expected an integer, got '" + t + "'");
  return out;
}

bool parse_bool(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  fail(line, "expected true/false, got '" + t + "'");
}

FaceRule parse_face(const std::string& v, int line) {
  const std::string t = trim(v);
  if (t == "wall") return FaceRule::Wall;
  if (t == "periodic") return FaceRule::Periodic;
  if (t == "outflow") return FaceRule::Outflow;
  fail(line, "expected wall|periodic|outflow, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(v);
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, line));
  if (out.empty()) fail(line, "expected a comma-separated list of numbers");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(FaceRule r) {
  switch (r) {
    case FaceRule::Wall: return "wall";
    case FaceRule::Periodic: return "periodic";
    default: return "outflow";
  }
}
std::string fmt(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

const char* const kRequired[] = {
    "lattice.dx_m",          "lattice.dt_s",       "lattice.nx",
    "lattice.ny",            "lattice.nz",         "lattice.tau_f",
    "lattice.tau_h",         "material.t_melt_k",  "material.latent_heat_k",
    "material.t_initial_k",  "material.rho_kg_m3", "material.cp_j_kg_k",
    "material.sigma_n_m",    "beam.current_a",     "beam.v_scan_m_s",
    "scan.n_lines",          "scan.x_start_m",     "scan.x_end_m",
};

struct Parser {
  RunConfig c;
  std::map<std::string, int> where;  // "section.key" -> line number
  bool preset_used = false;

  int line_of(const std::string& key) const {
    const auto it = where.find(key);
    return it == where.end() ? 0 : it->second;
  }

  [[noreturn]] void bad(const std::string& key, const std::string& msg) const {
    const int ln = line_of(key);
    if (ln > 0) fail(ln, key + ": " + msg);
    throw ConfigError(key + ": " + msg);
  }

  void set(const std::string& section, const std::string& key,
           const std::string& value, int line) {
    const std::string full = section + "." + key;
    where[full] = line;
    if (section == "lattice") {
      if (key == "dx_m") c.lattice.dx_m = parse_double(value, line);
      else if (key == "dt_s") c.lattice.dt_s = parse_double(value, line);
      else if (key == "nx") c.lattice.nx = static_cast<int>(parse_int(value, line));
      else if (key == "ny") c.lattice.ny = static_cast<int>(parse_int(value, line));
      else if (key == "nz") c.lattice.nz = static_cast<int>(parse_int(value, line));
      else if (key == "tau_f") c.lattice.tau_f = parse_double(value, line);
      else if (key == "tau_h") c.lattice.tau_h = parse_double(value, line);
      else fail(line, "unknown key '" + key + "' in [lattice]");
    } else if (section == "material") {
      if (key == "t_melt_k") c.material.t_melt_k = parse_double(value, line);
      else if (key == "latent_heat_k") c.material.latent_heat_k = parse_double(value, line);
      else if (key == "t_initial_k") c.material.t_initial_k = parse_double(value, line);
      else if (key == "rho_kg_m3") c.material.rho_kg_m3 = parse_double(value, line);
      else if (key == "cp_j_kg_k") c.material.cp_j_kg_k = parse_double(value, line);
      else if (key == "sigma_n_m") c.material.sigma_n_m = parse_double(value, line);
      else if (key == "contact_angle_deg") c.material.contact_angle_deg = parse_double(value, line);
      else if (key == "gravity_m_s2") c.material.gravity_m_s2 = parse_double(value, line);
      else fail(line, "unknown key '" + key + "' in [material]");
    } else if (section == "beam") {
      if (key == "voltage_v") c.beam.voltage_v = parse_double(value, line);
      else if (key == "current_a") c.beam.current_a = parse_double(value, line);
      else if (key == "v_scan_m_s") c.beam.v_scan_m_s = parse_double(value, line);
      else if (key == "sigma_m") c.beam.sigma_m = parse_double(value, line);
      else if (key == "eta") c.beam.eta = parse_double(value, line);
      else fail(line, "unknown key '" + key + "' in [beam]");
    } else if (section == "scan") {
      if (key == "n_lines") c.scan.n_lines = static_cast<int>(parse_int(value, line));
      else if (key == "line_offset_m") c.scan.line_offset_m = parse_double(value, line);
      else if (key == "x_start_m") c.scan.x_start_m = parse_double(value, line);
      else if (key == "x_end_m") c.scan.x_end_m = parse_double(value, line);
      else if (key == "y_center_m") c.scan.y_center_m = parse_double(value, line);
      else if (key == "beam_offset_m") c.scan.beam_offset_m = parse_double(value, line);
      else if (key == "serpentine") c.scan.serpentine = parse_bool(value, line);
      else fail(line, "unknown key '" + key + "' in [scan]");
    } else if (section == "powder") {
      if (key == "enabled") c.powder.enabled = parse_bool(value, line);
      else if (key == "layer_thickness_m") c.powder.layer_thickness_m = parse_double(value, line);
      else if (key == "substrate_height_m") c.powder.substrate_height_m = parse_double(value, line);
      else if (key == "mu_d_m") c.powder.mu_d_m = parse_double(value, line);
      else if (key == "lambda_d_m") c.powder.lambda_d_m = parse_double(value, line);
      else if (key == "d_min_m") c.powder.d_min_m = parse_double(value, line);
      else if (key == "d_max_m") c.powder.d_max_m = parse_double(value, line);
      else if (key == "phi") c.powder.phi = parse_double(value, line);
      else if (key == "max_attempts") c.powder.max_attempts = static_cast<int>(parse_int(value, line));
      else fail(line, "unknown key '" + key + "' in [powder]");
    } else if (section == "boundary") {
      if (key == "x_lo") c.boundary.x_lo = parse_face(value, line);
      else if (key == "x_hi") c.boundary.x_hi = parse_face(value, line);
      else if (key == "y_lo") c.boundary.y_lo = parse_face(value, line);
      else if (key == "y_hi") c.boundary.y_hi = parse_face(value, line);
      else if (key == "z_lo") c.boundary.z_lo = parse_face(value, line);
      else if (key == "z_hi") c.boundary.z_hi = parse_face(value, line);
      else fail(line, "unknown key '" + key + "' in [boundary]");
    } else if (section == "run") {
      if (key == "seed") c.run.seed = static_cast<std::uint64_t>(parse_int(value, line));
      else if (key == "threads") c.run.threads = static_cast<int>(parse_int(value, line));
      else if (key == "snapshot_every_steps") c.run.snapshot_every_steps = static_cast<int>(parse_int(value, line));
      else if (key == "cooldown_s") c.run.cooldown_s = parse_double(value, line);
      else if (key == "max_cooldown_s") c.run.max_cooldown_s = parse_double(value, line);
      else if (key == "substrate_sink") c.run.substrate_sink = parse_bool(value, line);
      else if (key == "t_avg_percentile") c.run.t_avg_percentile = parse_double(value, line);
      else if (key == "out_dir") c.run.out_dir = trim(value);
      else fail(line, "unknown key '" + key + "' in [run]");
    } else if (section == "sweep") {
      c.sweep.present = true;
      if (key == "v_scan_m_s") c.sweep.v_scan_m_s = parse_list(value, line);
      else if (key == "line_energy_kj_m") c.sweep.line_energy_kj_m = parse_list(value, line);
      else fail(line, "unknown key '" + key + "' in [sweep]");
    } else {
      fail(line, "unknown section [" + section + "]");
    }
  }

  void check_required() const {
    if (preset_used) return;
    std::string missing;
    for (const char* k : kRequired)
      if (!where.count(k)) missing += missing.empty() ? k : std::string(", ") + k;
    if (c.powder.enabled) {
      for (const char* k : {"powder.layer_thickness_m", "powder.substrate_height_m"})
        if (!where.count(k)) missing += missing.empty() ? k : std::string(", ") + k;
    }
    if (!missing.empty())
      throw ConfigError("missing required keys: " + missing);
  }

  void validate() const {
    if (!(c.lattice.dx_m > 0)) bad("lattice.dx_m", "must be > 0");
    if (!(c.lattice.dt_s > 0)) bad("lattice.dt_s", "must be > 0");
    if (c.lattice.nx < 1 || c.lattice.ny < 1 || c.lattice.nz < 1)
      bad("lattice.nx", "domain dimensions must be >= 1");
    if (!(c.lattice.tau_f > 0.5))
      bad("lattice.tau_f", "relaxation time must exceed the stability bound 0.5");
    if (!(c.lattice.tau_h > 0.5))
      bad("lattice.tau_h", "relaxation time must exceed the stability bound 0.5");
    if (!(c.material.t_melt_k > 0)) bad("material.t_melt_k", "must be > 0");
    if (!(c.material.latent_heat_k > 0)) bad("material.latent_heat_k", "must be > 0");
    if (!(c.material.t_initial_k > 0 && c.material.t_initial_k < c.material.t_melt_k))
      bad("material.t_initial_k", "preheat must lie below the melting point");
    if (!(c.material.rho_kg_m3 > 0)) bad("material.rho_kg_m3", "must be > 0");
    if (!(c.material.cp_j_kg_k > 0)) bad("material.cp_j_kg_k", "must be > 0");
    if (!(c.material.sigma_n_m >= 0)) bad("material.sigma_n_m", "must be >= 0");
    if (!(c.beam.voltage_v > 0)) bad("beam.voltage_v", "must be > 0");
    if (!(c.beam.current_a >= 0)) bad("beam.current_a", "must be >= 0");
    if (!(c.beam.v_scan_m_s > 0)) bad("beam.v_scan_m_s", "must be > 0");
    if (!(c.beam.sigma_m > 0)) bad("beam.sigma_m", "must be > 0");
    if (!(c.beam.eta > 0 && c.beam.eta <= 1)) bad("beam.eta", "must be in (0,1]");
    if (c.scan.n_lines < 1) bad("scan.n_lines", "must be >= 1");
    if (c.scan.n_lines > 1 && !(c.scan.line_offset_m > 0))
      bad("scan.line_offset_m", "must be > 0 for multi-line scans");
    if (!(c.scan.x_end_m > c.scan.x_start_m))
      bad("scan.x_end_m", "scan line must have positive length");
    if (!(c.scan.beam_offset_m >= 0)) bad("scan.beam_offset_m", "must be >= 0");
    if (c.powder.enabled) {
      if (!(c.powder.layer_thickness_m >= 0))
        bad("powder.layer_thickness_m", "must be >= 0");
      if (!(c.powder.substrate_height_m >= 0))
        bad("powder.substrate_height_m", "must be >= 0");
      if (!(c.powder.d_min_m < c.powder.d_max_m))
        bad("powder.d_min_m", "degenerate diameter truncation window");
      if (!(c.powder.mu_d_m > 0) || !(c.powder.lambda_d_m > 0))
        bad("powder.mu_d_m", "distribution parameters must be > 0");
      if (!(c.powder.phi > 0 && c.powder.phi < 1))
        bad("powder.phi", "packing fraction must be in (0,1)");
      const double top = c.powder.substrate_height_m + c.powder.layer_thickness_m;
      if (top >= c.lattice.nz * c.lattice.dx_m)
        bad("powder.layer_thickness_m",
            "substrate plus layer leaves no headspace in the domain");
    }
    if (c.run.threads < 1) bad("run.threads", "must be >= 1");
    if (c.run.snapshot_every_steps < 0)
      bad("run.snapshot_every_steps", "snapshot cadence must be >= 1 (0 = off)");
    if (!(c.run.cooldown_s >= 0)) bad("run.cooldown_s", "must be >= 0");
    if (!(c.run.max_cooldown_s >= c.run.cooldown_s))
      bad("run.max_cooldown_s", "must be >= cooldown_s");
    if (!(c.run.t_avg_percentile > 0 && c.run.t_avg_percentile <= 1))
      bad("run.t_avg_percentile", "must be in (0,1]");
    if (c.sweep.present) {
      if (c.sweep.v_scan_m_s.empty())
        bad("sweep.v_scan_m_s", "sweep requires at least one scan velocity");
      if (c.sweep.line_energy_kj_m.empty())
        bad("sweep.line_energy_kj_m", "sweep requires at least one line energy");
      for (double v : c.sweep.v_scan_m_s)
        if (!(v > 0)) bad("sweep.v_scan_m_s", "scan velocities must be > 0");
      for (double e : c.sweep.line_energy_kj_m)
        if (!(e > 0)) bad("sweep.line_energy_kj_m", "line energies must be > 0");
    }
  }
};

}  // namespace

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  if (name == "fig5_scenario") {
    // Full validation scenario: caption-exact scales, domain, hatch layout,
    // and preheat; transport and beam defaults are documented choices.
    c.lattice = {5e-6, 1.75e-7, 288, 128, 48, 0.51, 0.6875};
    c.material = {1928.0, 409.0, 1000.0, 4000.0, 700.0, 1.5, 90.0, 9.81};
    c.beam = {60e3, 0.016, 6.4, 100e-6, 0.9};
    c.scan = {7, 100e-6, 0.0, 1.44e-3, -1.0, 13.56e-3, true};
    c.powder = {true, 50e-6, 80e-6, 60e-6, 180e-6, 30e-6, 100e-6, 0.5, 40};
    c.run.cooldown_s = 1e-3;
    c.run.max_cooldown_s = 5e-3;
    return c;
  }
  if (name == "fig5_desk") {
    // Reduced single-line scenario for desk-scale sweeps: same cell size,
    // coarser time step, smaller domain, and synthetic material constants
    // chosen so the sweep resolves porous/good within minutes on one core
    // (high heat capacity damps surface temperatures, a low melting point
    // keeps the cool-down short, weak surface tension keeps fresh melt
    // stable at the coarser step).
    c.lattice = {5e-6, 5e-7, 128, 64, 48, 0.6, 1.0};
    c.material = {1400.0, 100.0, 1000.0, 8000.0, 750.0, 0.02, 90.0, 9.81};
    c.beam = {60e3, 50.0 / 60e3, 1.0, 40e-6, 0.9};
    c.scan = {1, 100e-6, 100e-6, 540e-6, -1.0, 1e-3, true};
    c.powder = {true, 50e-6, 80e-6, 60e-6, 180e-6, 30e-6, 100e-6, 0.5, 40};
    c.run.cooldown_s = 2.5e-4;
    c.run.max_cooldown_s = 3e-3;
    c.sweep.present = true;
    c.sweep.v_scan_m_s = {1.0, 2.0};
    c.sweep.line_energy_kj_m = {0.01, 0.05, 0.12};
    return c;
  }
  throw ConfigError("unknown preset '" + name +
                    "' (available: fig5_scenario, fig5_desk)");
}

RunConfig parse_config(const std::string& text) {
  Parser p;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool any_section = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find_first_of("#;");
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      any_section = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (section.empty()) {
      if (key == "preset") {
        if (any_section) fail(line, "preset must precede all sections");
        p.c = preset_config(value);
        p.preset_used = true;
        continue;
      }
      fail(line, "key '" + key + "' outside any section (only 'preset' may "
                 "appear at top level)");
    }
    p.set(section, key, value, line);
  }
  p.check_required();
  p.validate();
  return p.c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string to_ini(const RunConfig& c) {
  std::string s;
  const auto kv = [&s](const char* k, const std::string& v) {
    s += k;
    s += " = ";
    s += v;
    s += "\n";
  };
  s += "[lattice]\n";
  kv("dx_m", fmt(c.lattice.dx_m));
  kv("dt_s", fmt(c.lattice.dt_s));
  kv("nx", fmt(c.lattice.nx));
  kv("ny", fmt(c.lattice.ny));
  kv("nz", fmt(c.lattice.nz));
  kv("tau_f", fmt(c.lattice.tau_f));
  kv("tau_h", fmt(c.lattice.tau_h));
  s += "\n[material]\n";
  kv("t_melt_k", fmt(c.material.t_melt_k));
  kv("latent_heat_k", fmt(c.material.latent_heat_k));
  kv("t_initial_k", fmt(c.material.t_initial_k));
  kv("rho_kg_m3", fmt(c.material.rho_kg_m3));
  kv("cp_j_kg_k", fmt(c.material.cp_j_kg_k));
  kv("sigma_n_m", fmt(c.material.sigma_n_m));
  kv("contact_angle_deg", fmt(c.material.contact_angle_deg));
  kv("gravity_m_s2", fmt(c.material.gravity_m_s2));
  s += "\n[beam]\n";
  kv("voltage_v", fmt(c.beam.voltage_v));
  kv("current_a", fmt(c.beam.current_a));
  kv("v_scan_m_s", fmt(c.beam.v_scan_m_s));
  kv("sigma_m", fmt(c.beam.sigma_m));
  kv("eta", fmt(c.beam.eta));
  s += "\n[scan]\n";
  kv("n_lines", fmt(c.scan.n_lines));
  kv("line_offset_m", fmt(c.scan.line_offset_m));
  kv("x_start_m", fmt(c.scan.x_start_m));
  kv("x_end_m", fmt(c.scan.x_end_m));
  kv("y_center_m", fmt(c.scan.y_center_m));
  kv("beam_offset_m", fmt(c.scan.beam_offset_m));
  kv("serpentine", fmt(c.scan.serpentine));
  s += "\n[powder]\n";
  kv("enabled", fmt(c.powder.enabled));
  kv("layer_thickness_m", fmt(c.powder.layer_thickness_m));
  kv("substrate_height_m", fmt(c.powder.substrate_height_m));
  kv("mu_d_m", fmt(c.powder.mu_d_m));
  kv("lambda_d_m", fmt(c.powder.lambda_d_m));
  kv("d_min_m", fmt(c.powder.d_min_m));
  kv("d_max_m", fmt(c.powder.d_max_m));
  kv("phi", fmt(c.powder.phi));
  kv("max_attempts", fmt(c.powder.max_attempts));
  s += "\n[boundary]\n";
  kv("x_lo", fmt(c.boundary.x_lo));
  kv("x_hi", fmt(c.boundary.x_hi));
  kv("y_lo", fmt(c.boundary.y_lo));
  kv("y_hi", fmt(c.boundary.y_hi));
  kv("z_lo", fmt(c.boundary.z_lo));
  kv("z_hi", fmt(c.boundary.z_hi));
  s += "\n[run]\n";
  kv("seed", fmt(c.run.seed));
  kv("threads", fmt(c.run.threads));
  kv("snapshot_every_steps", fmt(c.run.snapshot_every_steps));
  kv("cooldown_s", fmt(c.run.cooldown_s));
  kv("max_cooldown_s", fmt(c.run.max_cooldown_s));
  kv("substrate_sink", fmt(c.run.substrate_sink));
  kv("t_avg_percentile", fmt(c.run.t_avg_percentile));
  kv("out_dir", c.run.out_dir);
  if (c.sweep.present) {
    s += "\n[sweep]\n";
    kv("v_scan_m_s", fmt(c.sweep.v_scan_m_s));
    kv("line_energy_kj_m", fmt(c.sweep.line_energy_kj_m));
  }
  return s;
}

double lattice_surface_tension(double sigma_n_m, double rho_kg_m3,
                               const UnitScales& s) {
  return sigma_n_m * s.dt_s * s.dt_s / (rho_kg_m3 * s.dx_m * s.dx_m * s.dx_m);
}

SimParams build_sim_params(const RunConfig& c) {
  SimParams p;
  p.scales = c.scales();
  p.tau_f = c.lattice.tau_f;
  p.tau_h = c.lattice.tau_h;
  p.material.t_melt_k = c.material.t_melt_k;
  p.material.e_solidus = c.material.t_melt_k;
  p.material.e_liquidus = c.material.t_melt_k + c.material.latent_heat_k;
  p.material.t_initial_k = c.material.t_initial_k;
  p.material.rho0 = 1.0;
  p.material.joule_to_energy =
      1.0 / (c.material.rho_kg_m3 * c.material.cp_j_kg_k * c.lattice.dx_m *
             c.lattice.dx_m * c.lattice.dx_m);
  p.surface.sigma =
      lattice_surface_tension(c.material.sigma_n_m, c.material.rho_kg_m3,
                              p.scales);
  p.surface.contact_angle_deg = c.material.contact_angle_deg;
  p.gravity_lat = {0.0, 0.0,
                   -c.material.gravity_m_s2 * c.lattice.dt_s * c.lattice.dt_s /
                       c.lattice.dx_m};
  p.boundary.x_lo = c.boundary.x_lo;
  p.boundary.x_hi = c.boundary.x_hi;
  p.boundary.y_lo = c.boundary.y_lo;
  p.boundary.y_hi = c.boundary.y_hi;
  p.boundary.z_lo = c.boundary.z_lo;
  p.boundary.z_hi = c.boundary.z_hi;
  p.validate();
  return p;
}

BeamParams build_beam_params(const RunConfig& c) {
  BeamParams b;
  b.voltage_v = c.beam.voltage_v;
  b.current_a = c.beam.current_a;
  b.v_scan_m_s = c.beam.v_scan_m_s;
  b.sigma_spot_m = c.beam.sigma_m;
  b.eta = c.beam.eta;
  b.validate();
  return b;
}

ScanPath build_scan_path(const RunConfig& c) {
  return ScanPath::hatch(c.scan.n_lines, c.scan.x_start_m, c.scan.x_end_m,
                         c.y_center_m(), c.scan.line_offset_m,
                         c.scan.serpentine, c.scan.beam_offset_m);
}

PowderSpec build_powder_spec(const RunConfig& c) {
  PowderSpec s;
  s.layer_thickness_m = c.powder.layer_thickness_m;
  s.substrate_height_m = c.powder.substrate_height_m;
  s.mu_d_m = c.powder.mu_d_m;
  s.lambda_d_m = c.powder.lambda_d_m;
  s.d_min_m = c.powder.d_min_m;
  s.d_max_m = c.powder.d_max_m;
  s.phi_target = c.powder.phi;
  s.seed = c.run.seed;
  s.max_attempts_per_particle = c.powder.max_attempts;
  return s;
}

}  // namespace ebm
