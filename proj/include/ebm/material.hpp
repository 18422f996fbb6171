#pragma once

#include <stdexcept>

namespace ebm {

/// Piecewise-linear enthalpy-temperature relation with a latent-heat plateau.
/// Cell energy E is stored in units where the solid branch has slope
/// dT/dE = slope_solid (configs choose Kelvin-per-solid-heat-capacity units,
/// making slope_solid = 1). Between the solidus energy e_solidus and the
/// liquidus energy e_liquidus the temperature stays at t_melt while latent
/// heat is absorbed/released.
struct MaterialParams {
  double t_melt_k = 0.0;       ///< melting temperature [K]
  double e_solidus = 0.0;      ///< energy at which melting starts, T(e_solidus) = t_melt
  double e_liquidus = 0.0;     ///< energy at which melting completes
  double slope_solid = 1.0;    ///< dT/dE below solidus [K per energy unit]
  double slope_liquid = 1.0;   ///< dT/dE above liquidus [K per energy unit]

  double rho0 = 1.0;           ///< reference lattice density of the melt

  double t_initial_k = 0.0;    ///< preheat temperature [K]
  double joule_to_energy = 1.0;///< converts J deposited in one cell to energy units

  void validate() const {
    if (!(e_liquidus > e_solidus))
      throw std::invalid_argument("liquidus energy must exceed solidus energy");
    if (!(slope_solid > 0.0) || !(slope_liquid > 0.0))
      throw std::invalid_argument("enthalpy slopes must be positive");
    if (!(rho0 > 0.0))
      throw std::invalid_argument("reference density must be positive");
  }

  double temperature(double e) const {
    if (e <= e_solidus) return t_melt_k - slope_solid * (e_solidus - e);
    if (e >= e_liquidus) return t_melt_k + slope_liquid * (e - e_liquidus);
    return t_melt_k;
  }

  /// Liquid fraction along the plateau: 0 at solidus, 1 at liquidus.
  double melt_fraction(double e) const {
    if (e <= e_solidus) return 0.0;
    if (e >= e_liquidus) return 1.0;
    return (e - e_solidus) / (e_liquidus - e_solidus);
  }

  /// Inverse of temperature(); a temperature exactly at t_melt maps to the
  /// solidus edge of the plateau.
  double energy_of_temperature(double t) const {
    if (t <= t_melt_k) return e_solidus - (t_melt_k - t) / slope_solid;
    return e_liquidus + (t - t_melt_k) / slope_liquid;
  }

  double initial_energy() const { return energy_of_temperature(t_initial_k); }
};

}  // namespace ebm
