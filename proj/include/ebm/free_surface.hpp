#pragma once

#include <cstdint>

#include "ebm/grid.hpp"

namespace ebm {

class ThreadPool;

namespace free_surface {

/// Parameters of the liquid-gas interface treatment.
struct Params {
  double sigma = 0.0;              ///< surface tension, lattice units
  double rho_ambient = 1.0;        ///< ambient gas density (pressure datum)
  double contact_angle_deg = 90.0; ///< wetting angle at solid contact
  double conversion_delta = 1e-3;  ///< hysteresis width for fill/empty flips
};

struct ConversionReport {
  int filled = 0;    ///< interface cells that became liquid
  int emptied = 0;   ///< interface cells that became gas
  int opened = 0;    ///< gas cells promoted to interface (closure)
  int covered = 0;   ///< liquid cells demoted to interface (closure)
  int repaired = 0;  ///< closure violations fixed by the defensive scan
};

/// Smooths the fill field (one 3^3 weighted-average pass, with virtual fill
/// levels at solid cells encoding the contact angle) into state.fill_smooth,
/// then refreshes its halo layer by the face rules.
void smooth_fill(SimState& s, const Params& p, const BoundaryRules& rules,
                 ThreadPool* pool);

/// Computes outward unit normals and curvature for every interface cell from
/// the smoothed fill field. Curvature is the divergence of the outward
/// normal (positive over a droplet), clamped to |kappa| <= 1 per cell.
/// Degenerate cells (|grad| < 1e-8) get a steepest-raw-fill-descent normal
/// and zero curvature.
void update_geometry(SimState& s, ThreadPool* pool);

/// Accumulates the per-step mass exchange of every interface cell with its
/// liquid and interface stencil neighbors from the current (pre-stream)
/// populations: dm_i = (f_inv(i) at neighbor - f_i here) * s, with s = 1 for
/// liquid neighbors and the mean fill level for interface neighbors.
/// Pairwise antisymmetric by construction, hence exactly conservative.
void exchange_mass(SimState& s, ThreadPool* pool);

/// Applies the fill/empty conversion rules with hysteresis delta:
/// m > (1+delta)*rho -> liquid, m < -delta*rho -> gas; cascades neighbor
/// flips to keep the interface layer closed (26-neighborhood), redistributes
/// excess mass to interface neighbors weighted by normal alignment (global
/// ledger as last resort), and refreshes interface fill levels to m/rho.
/// Deterministic: cells are processed in linear index order, fills before
/// empties. Periodic faces wrap the closure cascades.
ConversionReport convert_cells(SimState& s, const Params& p,
                               const BoundaryRules& rules, double rho0);

/// Total tracked mass: liquid density + interface mass + solid fill*rho0 +
/// the excess ledger. Conserved by streaming, exchange, and conversion in a
/// closed domain.
double total_mass(const SimState& s, double rho0);

/// True if some liquid cell touches a gas cell within the 26-neighborhood
/// (the invariant every step must restore).
bool closure_violated(const SimState& s);

}  // namespace free_surface
}  // namespace ebm
