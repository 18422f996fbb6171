#pragma once

#include <stdexcept>
#include <string>

#include "ebm/stencil.hpp"

namespace ebm {

/// Mapping between physical units and lattice units for the diffusive-scaled
/// D3Q19 model. Lattice spacing dx [m] and time step dt [s] fix all
/// conversions; the reference density rho0 is 1 in lattice units.
struct UnitScales {
  double dx_m = 1.0;   ///< lattice spacing [m]
  double dt_s = 1.0;   ///< time step [s]

  double cs2_phys() const {  // physical speed-of-sound squared [m^2/s^2]
    return stencil::CS2 * dx_m * dx_m / (dt_s * dt_s);
  }
  double velocity_to_lattice(double v_m_s) const { return v_m_s * dt_s / dx_m; }
  double velocity_to_phys(double v_lat) const { return v_lat * dx_m / dt_s; }
  double accel_to_lattice(double a_m_s2) const {
    return a_m_s2 * dt_s * dt_s / dx_m;
  }
};

/// Relaxation time from a physical diffusivity (kinematic viscosity or
/// thermal diffusivity), tau = nu / (cs2_phys * dt) + 1/2. Values at or below
/// 1/2 carry zero or negative diffusivity and are rejected.
inline double relaxation_time(double diffusivity_m2_s, const UnitScales& u) {
  double tau = diffusivity_m2_s / (u.cs2_phys() * u.dt_s) + 0.5;
  if (!(tau > 0.5))
    throw std::invalid_argument("relaxation time must exceed 1/2 (got tau=" +
                                std::to_string(tau) + ")");
  return tau;
}

/// Inverse map: diffusivity carried by a relaxation time, in lattice units
/// (cell^2 per step): nu_lat = cs2 * (tau - 1/2).
inline double lattice_diffusivity(double tau) {
  return stencil::CS2 * (tau - 0.5);
}

/// Physical diffusivity for a relaxation time under the given scales [m^2/s].
inline double physical_diffusivity(double tau, const UnitScales& u) {
  return lattice_diffusivity(tau) * u.dx_m * u.dx_m / u.dt_s;
}

inline void require_valid_tau(double tau, const char* name) {
  if (!(tau > 0.5))
    throw std::invalid_argument(std::string(name) +
                                " must exceed 1/2 (got " +
                                std::to_string(tau) + ")");
}

}  // namespace ebm
