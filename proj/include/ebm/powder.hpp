#pragma once

#include <cstdint>
#include <vector>

#include "ebm/grid.hpp"
#include "ebm/rng.hpp"
#include "ebm/units.hpp"

namespace ebm {

/// Randomized particle layer on a flat substrate. Diameters follow an
/// inverse-Gaussian distribution truncated to [d_min, d_max]; packing is
/// sequential drop-and-roll, so (spec, seed, domain) fully determines the bed.
struct PowderSpec {
  double layer_thickness_m = 50e-6;
  double substrate_height_m = 0.0;  ///< solid fill from z=0 up to this height
  double mu_d_m = 60e-6;            ///< mean particle diameter
  double lambda_d_m = 180e-6;       ///< inverse-Gaussian shape parameter
  double d_min_m = 30e-6;
  double d_max_m = 100e-6;
  double phi_target = 0.5;          ///< packing fraction inside the layer slab
  std::uint64_t seed = 1;
  int max_attempts_per_particle = 40;

  void validate() const;
};

struct Sphere {
  double x = 0, y = 0, z = 0, r = 0;  // meters
};

struct BedResult {
  std::vector<Sphere> spheres;
  double achieved_phi = 0.0;  ///< cell-audit fraction of the layer slab
  int placement_failures = 0;
  bool warning = false;  ///< failures occurred or |achieved - target| > 0.05
};

/// Draws n truncated inverse-Gaussian diameters (meters). Deterministic for
/// a fixed generator state; throws on a degenerate truncation window.
std::vector<double> sample_diameters(const PowderSpec& spec, int n, Rng& rng);

/// Packs spheres above the substrate by sequential drop-and-roll: each sphere
/// falls at a random (x, y), then rolls by steepest descent around its
/// contacts until it rests on three contacts or on the substrate. Spheres
/// whose top would poke above the layer plane are rejected and retried
/// elsewhere. Stops once the nominal sphere volume reaches the target
/// packing fraction or the attempt budget runs out.
BedResult generate_bed(const PowderSpec& spec, const UnitScales& scales,
                       const GridDims& dims);

/// Writes the bed into the flag/fill arrays: a cell is Solid (fill 1) iff its
/// center lies inside a sphere or below the substrate top; all other cells
/// become Gas. Also fills achieved_phi/warning on the result. Pdf and energy
/// initialization is the scene finalization's job, not this function's.
void rasterize_bed(SimState& s, BedResult& bed, const PowderSpec& spec,
                   const UnitScales& scales);

}  // namespace ebm
