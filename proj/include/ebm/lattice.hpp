#pragma once

#include <array>
#include <cmath>

#include "ebm/stencil.hpp"

namespace ebm {

/// Second-order truncated Maxwellian for the flow populations:
///   feq_i = w_i * rho * (1 + 3 e.u + 4.5 (e.u)^2 - 1.5 u.u)
inline void equilibrium_f(double rho, double ux, double uy, double uz,
                          std::array<double, stencil::Q>& out) {
  const double usq = 1.5 * (ux * ux + uy * uy + uz * uz);
  for (int i = 0; i < stencil::Q; ++i) {
    const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                      stencil::E[i][2] * uz;
    out[i] = stencil::W[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - usq);
  }
}

/// First-order equilibrium for the energy populations (advected scalar):
///   heq_i = w_i * E * (1 + 3 e.u)
inline void equilibrium_h(double energy, double ux, double uy, double uz,
                          std::array<double, stencil::Q>& out) {
  for (int i = 0; i < stencil::Q; ++i) {
    const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                      stencil::E[i][2] * uz;
    out[i] = stencil::W[i] * energy * (1.0 + 3.0 * eu);
  }
}

/// Single feq component; convenience for boundary reconstruction.
inline double equilibrium_f_i(int i, double rho, double ux, double uy,
                              double uz) {
  const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                    stencil::E[i][2] * uz;
  const double usq = 1.5 * (ux * ux + uy * uy + uz * uz);
  return stencil::W[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - usq);
}

struct FlowMoments {
  double rho = 0.0;
  double ux = 0.0, uy = 0.0, uz = 0.0;
};

/// Density and momentum of a flow population set. Velocity is momentum over
/// density; a vanishing or negative density yields zero velocity.
inline FlowMoments flow_moments(const double* f) {
  double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
  for (int i = 0; i < stencil::Q; ++i) {
    rho += f[i];
    mx += stencil::E[i][0] * f[i];
    my += stencil::E[i][1] * f[i];
    mz += stencil::E[i][2] * f[i];
  }
  FlowMoments m;
  m.rho = rho;
  if (rho > 1e-300) {
    m.ux = mx / rho;
    m.uy = my / rho;
    m.uz = mz / rho;
  }
  return m;
}

inline double energy_moment(const double* h) {
  double e = 0.0;
  for (int i = 0; i < stencil::Q; ++i) e += h[i];
  return e;
}

/// Body-force population term (discretised acceleration g, lattice units):
///   F_i = w_i rho [ 3 (e - u).g + 9 (e.u)(e.g) ]
/// Sums to zero mass and exactly rho*g momentum for any u.
inline void force_populations(double rho, double ux, double uy, double uz,
                              double gx, double gy, double gz,
                              std::array<double, stencil::Q>& out) {
  const double ug = ux * gx + uy * gy + uz * gz;
  for (int i = 0; i < stencil::Q; ++i) {
    const double eg = stencil::E[i][0] * gx + stencil::E[i][1] * gy +
                      stencil::E[i][2] * gz;
    const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                      stencil::E[i][2] * uz;
    out[i] = stencil::W[i] * rho * (3.0 * (eg - ug) + 9.0 * eu * eg);
  }
}

}  // namespace ebm
