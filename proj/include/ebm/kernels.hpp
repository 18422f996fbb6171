#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ebm/beam.hpp"
#include "ebm/free_surface.hpp"
#include "ebm/grid.hpp"
#include "ebm/kahan.hpp"
#include "ebm/material.hpp"
#include "ebm/phase_change.hpp"
#include "ebm/units.hpp"

namespace ebm {

class ThreadPool;

/// Everything needed to time-step the model; all dynamic quantities in
/// lattice units (conversion happens at configuration time).
struct SimParams {
  UnitScales scales;
  double tau_f = 1.0;
  double tau_h = 1.0;
  std::array<double, 3> gravity_lat = {0, 0, 0};
  MaterialParams material;
  free_surface::Params surface;
  BoundaryRules boundary;

  double u_limit = 0.3;          ///< velocity magnitude flagged as divergence
  double f_negative_tol = -1e-12;///< post-collision negativity tolerance
  int divergence_abort_cells = 100;

  void validate() const {
    require_valid_tau(tau_f, "tau_f");
    require_valid_tau(tau_h, "tau_h");
    material.validate();
  }
};

/// Per-step monitoring totals. Mass and energy are compensated sums over the
/// whole grid in a fixed chunk order (bitwise reproducible for any thread
/// count).
struct StepReport {
  std::int64_t step = 0;
  double total_mass = 0.0;     ///< liquid rho + interface mass + solid fill + ledger
  double total_energy = 0.0;   ///< sum of cell energies over material cells
  double max_speed = 0.0;      ///< max |u| over fluid cells
  double max_temperature_k = 0.0;
  int n_interface = 0;
  int n_fluid = 0;
  phase_change::PhaseReport phase;
  free_surface::ConversionReport conversion;
  std::int64_t diverged_cells = 0;  ///< cumulative
  BeamSample beam;
  double beam_deposited_units = 0.0;  ///< cumulative, lattice energy
  double beam_off_domain_units = 0.0;
  double beam_transmitted_units = 0.0;
  std::int64_t beam_powered_steps = 0;
};

/// Orchestrates one full update per step: halo refresh, surface geometry,
/// beam deposition, mass exchange, stream (with interface reconstruction and
/// wall bounce-back), collide (BGK + gravity + beam source), phase change,
/// and cell conversion.
class Simulation {
 public:
  Simulation(const SimParams& params, const GridDims& dims, int threads = 1);
  ~Simulation();

  SimState& state() { return s_; }
  const SimState& state() const { return s_; }
  const SimParams& params() const { return p_; }
  std::int64_t step_count() const { return step_count_; }

  // --- scene setup -------------------------------------------------------
  /// Sets a cell's flag and fill level (no pdf init; call finalize_scene).
  void set_cell(int x, int y, int z, CellFlag flag, double fill = -1.0);
  /// Initializes pdfs/macros from flags+fills: equilibrium at rest with
  /// rho0 and the preheat energy; interface mass = fill*rho0; then repairs
  /// closure and computes the initial geometry. Call once after scene setup.
  void finalize_scene();

  void attach_beam(const BeamParams& beam, const ScanPath& path);
  bool has_beam() const { return beam_.has_value(); }
  /// True once the scan path has completed (never true without a beam).
  bool beam_done() const;

  /// Pins the energy of listed cells to a fixed value after every step
  /// (Dirichlet condition; used for substrate heat sinking and benchmarks).
  void pin_energy(const std::vector<std::size_t>& cells, double energy);
  /// Convenience: pins every solid cell of interior layer z to energy E.
  void pin_energy_layer(int z, double energy);

  // --- stepping ----------------------------------------------------------
  StepReport step();
  const StepReport& last_report() const { return report_; }
  bool aborted() const { return aborted_; }

  /// Re-derives macroscopic caches from current populations (tests use this
  /// after poking pdfs directly).
  void refresh_macros();

  /// Surface temperatures under the current beam footprint (empty when the
  /// beam is not on-domain this step).
  const std::vector<double>& footprint_temperatures() const {
    return footprint_temps_;
  }

 private:
  void refresh_halos();
  void stream();
  void collide();
  void apply_pins();
  void beam_stage();
  void build_halo_maps();
  StepReport make_report();

  SimParams p_;
  SimState s_;
  std::unique_ptr<ThreadPool> pool_;
  std::int64_t step_count_ = 0;
  StepReport report_;
  bool aborted_ = false;

  std::optional<BeamParams> beam_;
  ScanPath path_;
  double beam_step_units_ = 0.0;  ///< eta*P*dt in lattice energy units
  Kahan beam_dep_, beam_off_, beam_trans_;
  std::int64_t beam_powered_steps_ = 0;
  std::vector<double> footprint_temps_;

  std::vector<std::pair<std::size_t, double>> pinned_;

  // Precomputed halo copy maps (dst, src) applied in x, y, z stage order;
  // wall-face halos are static and set once.
  std::vector<std::pair<std::size_t, std::size_t>> halo_copy_[3];
  std::vector<std::size_t> wall_halo_;
  std::vector<std::uint8_t> wall_halo_mask_;  ///< padded-size; 1 beyond walls

  bool has_gas_ = false;  ///< set by finalize_scene; gates surface stages
  std::int64_t diverged_total_ = 0;

  // Per-z-slice reduction scratch, combined in slice order.
  std::vector<Kahan> chunk_mass_, chunk_energy_;
  std::vector<double> chunk_max_u2_, chunk_max_e_;
  std::vector<int> chunk_iface_, chunk_fluid_;
  std::vector<std::int64_t> chunk_diverged_;

  friend struct SimTestAccess;
};

}  // namespace ebm
