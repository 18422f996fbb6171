#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebm/grid.hpp"
#include "ebm/material.hpp"
#include "ebm/powder.hpp"
#include "ebm/units.hpp"

namespace ebm {

/// Legacy-VTK structured-points ASCII snapshot of the interior grid: cell
/// flag, fill level, density, velocity, and temperature (gas cells report
/// the build temperature). Deterministic text for identical state.
void write_vtk(const SimState& s, const MaterialParams& mat,
               const UnitScales& scales, std::int64_t step,
               const std::string& path);

/// Binary sidecar with the same arrays in a fixed little-endian layout:
/// 64-byte header (magic "EBMSNAP1", dims, dx, step), then flag bytes and
/// fill/rho/ux/uy/uz/T doubles, x-fastest. Bit-exact round-trip.
void write_sidecar(const SimState& s, const MaterialParams& mat,
                   const UnitScales& scales, std::int64_t step,
                   const std::string& path);

struct SidecarData {
  std::int64_t nx = 0, ny = 0, nz = 0;
  double dx_m = 0;
  std::int64_t step = 0;
  std::vector<std::uint8_t> flag;
  std::vector<double> fill, rho, ux, uy, uz, temperature;
};

SidecarData read_sidecar(const std::string& path);

/// Bed volume (flags + fill levels) so a sweep can reuse one packing across
/// its points. 64-byte header (magic "EBMBED01", dims, dx, audit fields),
/// then flag bytes and fill doubles, x-fastest over the interior.
void write_bed(const SimState& s, const BedResult& bed,
               const UnitScales& scales, const std::string& path);

/// Loads a bed into a state with matching dimensions (throws on mismatch);
/// returns the stored audit info (spheres are not persisted).
BedResult read_bed(SimState& s, const UnitScales& scales,
                   const std::string& path);

}  // namespace ebm
