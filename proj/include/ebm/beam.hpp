#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ebm/grid.hpp"
#include "ebm/material.hpp"
#include "ebm/units.hpp"

namespace ebm {

/// Electron-beam parameters. Power is voltage times current; the Gaussian
/// footprint sigma is independent of power (fixed-focus model).
struct BeamParams {
  double voltage_v = 60e3;
  double current_a = 0.0;
  double v_scan_m_s = 1.0;
  double sigma_spot_m = 100e-6;
  double eta = 0.9;  ///< absorption efficiency in (0,1]

  double power_w() const { return voltage_v * current_a; }

  void validate() const {
    if (!(power_w() >= 0.0)) throw std::invalid_argument("beam power must be >= 0");
    if (!(v_scan_m_s > 0.0)) throw std::invalid_argument("scan velocity must be > 0");
    if (!(sigma_spot_m > 0.0)) throw std::invalid_argument("beam sigma must be > 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in (0,1]");
  }
};

/// Line energy deposited per unit scan length: P / v_scan [J/m].
inline double line_energy(const BeamParams& p) {
  if (!(p.v_scan_m_s > 0.0))
    throw std::invalid_argument("scan velocity must be > 0");
  return p.power_w() / p.v_scan_m_s;
}

/// Hatch trajectory: parallel lines scanned at constant speed, with an
/// off-domain travel of gap_length_m between consecutive lines during which
/// the beam stays powered but deposits nothing (the clock advances).
struct ScanPath {
  struct Segment {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // meters
    double length() const;
  };
  std::vector<Segment> lines;
  double gap_length_m = 0.0;

  /// Serpentine (or unidirectional) hatch of n parallel x-aligned lines
  /// centered vertically at y_center, separated by line_offset.
  static ScanPath hatch(int n_lines, double x_start, double x_end,
                        double y_center, double line_offset, bool serpentine,
                        double gap_length);

  double line_duration_s(int k, double v) const { return lines[k].length() / v; }
  double gap_duration_s(double v) const { return gap_length_m / v; }
  /// Time from start until the path completes (lines + gaps between them).
  double total_duration_s(double v) const;
  /// Beam-on-domain time only (sum of line durations).
  double on_domain_duration_s(double v) const;
};

struct BeamSample {
  enum class State { OnDomain, OffDomain, Done };
  State state = State::Done;
  double x_m = 0, y_m = 0;
  int line = -1;
};

/// Arc-length position along the path at time t: on a line -> OnDomain with
/// coordinates; inside a gap -> OffDomain (powered, no deposition); past the
/// end -> Done (powered off).
BeamSample beam_position(const ScanPath& path, double v_scan, double t_s);

/// One step's deposition bookkeeping, all in lattice energy units.
struct DepositResult {
  double deposited = 0.0;    ///< landed in material surface cells
  double transmitted = 0.0;  ///< fell into all-gas columns (holes)
  double off_domain = 0.0;   ///< step budget minus the in-domain shares
};

/// Spreads one step's beam energy (total_units, already converted to lattice
/// energy units) over the surface columns within 3 sigma of the beam axis:
/// each column's share is the product of axis-wise Gaussian CDF differences,
/// deposited into the topmost non-gas cell (recorded in s.beam_energy and
/// s.beam_cells for the collide stage). Gas-only columns count as
/// transmitted; everything that misses the domain (including the >3 sigma
/// truncation residue) counts as off-domain.
DepositResult deposit(SimState& s, const UnitScales& scales, double beam_x_m,
                      double beam_y_m, double sigma_m, double total_units);

/// Temperatures of the topmost non-gas cell of every column within
/// 3 sigma of the beam axis, for the surface-overheating monitor.
/// Appends to out; returns the number of columns sampled.
int footprint_surface_temperatures(const SimState& s, const UnitScales& scales,
                                   const MaterialParams& mat, double beam_x_m,
                                   double beam_y_m, double sigma_m,
                                   std::vector<double>& out);

}  // namespace ebm
