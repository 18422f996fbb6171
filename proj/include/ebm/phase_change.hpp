#pragma once

#include "ebm/grid.hpp"
#include "ebm/material.hpp"

namespace ebm {
namespace phase_change {

struct PhaseReport {
  int melted = 0;      ///< solid cells that became fluid this step
  int solidified = 0;  ///< fluid cells that froze this step
};

/// Flips cell states by the post-collide energies: a solid cell at or above
/// the liquidus energy becomes fluid (interface if it touches gas or is
/// partially filled, liquid otherwise) with populations reset to equilibrium
/// at rest; a liquid/interface cell at or below the solidus energy freezes in
/// place, its fill level set to the mass it carried. Cells inside the latent
/// plateau stay solid for flow purposes. The energy populations are never
/// touched. Deterministic linear-index order.
PhaseReport update_phase_state(SimState& s, const MaterialParams& mat);

}  // namespace phase_change
}  // namespace ebm
