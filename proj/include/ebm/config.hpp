#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ebm/beam.hpp"
#include "ebm/grid.hpp"
#include "ebm/kernels.hpp"
#include "ebm/powder.hpp"
#include "ebm/units.hpp"

namespace ebm {

/// Thrown by parse_config with a line-numbered, human-readable message.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LatticeConfig {
  double dx_m = 0, dt_s = 0;
  int nx = 0, ny = 0, nz = 0;
  double tau_f = 0, tau_h = 0;
  bool operator==(const LatticeConfig&) const = default;
};

struct MaterialConfig {
  double t_melt_k = 0;       ///< melting point (plateau start)
  double latent_heat_k = 0;  ///< latent heat divided by cp (plateau width)
  double t_initial_k = 0;    ///< preheat / build temperature
  double rho_kg_m3 = 0;
  double cp_j_kg_k = 0;
  double sigma_n_m = 0;      ///< surface tension coefficient
  double contact_angle_deg = 90;
  double gravity_m_s2 = 9.81;
  bool operator==(const MaterialConfig&) const = default;
};

struct BeamConfig {
  double voltage_v = 60e3;
  double current_a = 0;
  double v_scan_m_s = 0;
  double sigma_m = 100e-6;
  double eta = 0.9;
  bool operator==(const BeamConfig&) const = default;
};

struct ScanConfig {
  int n_lines = 1;
  double line_offset_m = 100e-6;
  double x_start_m = 0, x_end_m = 0;
  double y_center_m = -1;  ///< negative = domain center
  double beam_offset_m = 13.56e-3;  ///< off-domain travel between lines
  bool serpentine = true;
  bool operator==(const ScanConfig&) const = default;
};

struct PowderConfig {
  bool enabled = true;
  double layer_thickness_m = 0;
  double substrate_height_m = 0;
  double mu_d_m = 60e-6;
  double lambda_d_m = 180e-6;
  double d_min_m = 30e-6;
  double d_max_m = 100e-6;
  double phi = 0.5;
  int max_attempts = 40;
  bool operator==(const PowderConfig&) const = default;
};

struct BoundaryConfig {
  FaceRule x_lo = FaceRule::Wall, x_hi = FaceRule::Wall;
  FaceRule y_lo = FaceRule::Wall, y_hi = FaceRule::Wall;
  FaceRule z_lo = FaceRule::Wall, z_hi = FaceRule::Outflow;
  bool operator==(const BoundaryConfig&) const = default;
};

struct RunSection {
  std::uint64_t seed = 1;
  int threads = 1;
  int snapshot_every_steps = 0;  ///< 0 disables snapshots
  double cooldown_s = 1e-3;      ///< minimum post-scan time
  double max_cooldown_s = 5e-3;  ///< hard cap if fluid lingers
  bool substrate_sink = true;    ///< pin the bottom substrate layer at T_0
  double t_avg_percentile = 0.99;  ///< per-step surface-temp outlier cut
  std::string out_dir = "out";
  bool operator==(const RunSection&) const = default;
};

struct SweepConfig {
  bool present = false;
  std::vector<double> v_scan_m_s;
  std::vector<double> line_energy_kj_m;
  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  LatticeConfig lattice;
  MaterialConfig material;
  BeamConfig beam;
  ScanConfig scan;
  PowderConfig powder;
  BoundaryConfig boundary;
  RunSection run;
  SweepConfig sweep;
  bool operator==(const RunConfig&) const = default;

  GridDims dims() const { return {lattice.nx, lattice.ny, lattice.nz}; }
  UnitScales scales() const { return {lattice.dx_m, lattice.dt_s}; }
  double y_center_m() const {
    return scan.y_center_m >= 0 ? scan.y_center_m
                                : 0.5 * lattice.ny * lattice.dx_m;
  }
};

/// Built-in presets: "fig5_scenario" (full validation scenario) and
/// "fig5_desk" (reduced single-line sweep for desk-scale testing).
RunConfig preset_config(const std::string& name);

/// Parses `key = value` sections; a top-level `preset = <name>` line loads
/// that preset first and later keys override it. Unknown keys/sections,
/// malformed values, missing required keys, and validation violations all
/// throw ConfigError with the offending line number.
RunConfig parse_config(const std::string& text);

/// Reads, then parses; file-not-found and parse errors carry the path.
RunConfig load_config(const std::string& path);

/// Canonical full serialization; parse_config(to_ini(c)) == c exactly.
std::string to_ini(const RunConfig& c);

// --- builders: translate physical config into lattice-unit runtime types ---
SimParams build_sim_params(const RunConfig& c);
BeamParams build_beam_params(const RunConfig& c);
ScanPath build_scan_path(const RunConfig& c);
PowderSpec build_powder_spec(const RunConfig& c);

/// Surface tension in lattice units: sigma_phys * dt^2 / (rho_phys * dx^3).
double lattice_surface_tension(double sigma_n_m, double rho_kg_m3,
                               const UnitScales& s);

}  // namespace ebm
