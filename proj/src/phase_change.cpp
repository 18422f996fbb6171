#include "ebm/phase_change.hpp"

#include <array>

#include "ebm/lattice.hpp"

namespace ebm {
namespace phase_change {

namespace {

bool touches_gas(const SimState& s, int x, int y, int z) {
  const GridDims& d = s.dims;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        if (s.flag[d.idx(x + dx, y + dy, z + dz)] == CellFlag::Gas)
          return true;
      }
  return false;
}

}  // namespace

PhaseReport update_phase_state(SimState& s, const MaterialParams& mat) {
  PhaseReport rep;
  const GridDims& d = s.dims;
  const double rho0 = mat.rho0;

  std::array<double, stencil::Q> feq_rest;
  equilibrium_f(rho0, 0.0, 0.0, 0.0, feq_rest);

  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        const CellFlag f = s.flag[c];
        if (f == CellFlag::Gas) continue;
        const double e = s.energy[c];

        if (f == CellFlag::Solid) {
          if (e < mat.e_liquidus) continue;  // plateau cells stay rigid
          // Fully molten: join the flow at rest. Partially filled solids
          // (refrozen interface cells) and gas-adjacent cells become
          // interface so the fill bookkeeping and closure stay exact.
          const double fill = s.fill[c];
          const bool partial = fill < 1.0 - 1e-12;
          if (partial || touches_gas(s, x, y, z)) {
            s.flag[c] = CellFlag::Interface;
            s.mass[c] = fill * rho0;
            s.fill[c] = fill;
          } else {
            s.flag[c] = CellFlag::Liquid;
            s.mass[c] = 0.0;
            s.fill[c] = 1.0;
          }
          for (int i = 0; i < stencil::Q; ++i) s.pdf.f_cur(i)[c] = feq_rest[i];
          s.rho[c] = rho0;
          s.ux[c] = s.uy[c] = s.uz[c] = 0.0;
          s.ever_fluid[c] = 1;
          ++rep.melted;
        } else {
          if (e > mat.e_solidus) continue;
          // Freeze in place: mass becomes a stored fill level; the flow
          // populations are left untouched (ignored while solid, replaced
          // on remelt).
          const double mass =
              f == CellFlag::Interface ? s.mass[c] : s.rho[c];
          double fill = mass / rho0;
          if (fill < 0.0) {
            // A nearly-empty interface cell can freeze with slightly
            // negative tracked mass; park the residue on the ledger so the
            // global audit stays exact.
            s.excess_mass_ledger += fill * rho0;
            fill = 0.0;
          }
          s.flag[c] = CellFlag::Solid;
          s.fill[c] = fill;
          s.mass[c] = 0.0;
          s.ux[c] = s.uy[c] = s.uz[c] = 0.0;
          ++rep.solidified;
        }
      }
  return rep;
}

}  // namespace phase_change
}  // namespace ebm
