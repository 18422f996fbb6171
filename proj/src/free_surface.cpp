#include "ebm/free_surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "ebm/kahan.hpp"
#include "ebm/lattice.hpp"
#include "ebm/parallel.hpp"

namespace ebm {
namespace free_surface {

namespace {

/// The 26 face/edge/corner offsets, fixed order (z, then y, then x varying
/// fastest), with unit direction vectors for alignment weighting.
struct Neighborhood {
  std::array<std::array<int, 3>, 26> off;
  std::array<std::array<double, 3>, 26> unit;
};

const Neighborhood& hood() {
  static const Neighborhood n = [] {
    Neighborhood h{};
    int k = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          h.off[k] = {dx, dy, dz};
          const double len = std::sqrt(double(dx * dx + dy * dy + dz * dz));
          h.unit[k] = {dx / len, dy / len, dz / len};
          ++k;
        }
    return h;
  }();
  return n;
}

template <class F>
void for_chunks(ThreadPool* pool, int n_chunks, F&& fn) {
  if (pool)
    pool->run(n_chunks, fn);
  else
    for (int c = 0; c < n_chunks; ++c) fn(c);
}

inline double effective_fill_nonsolid(CellFlag f, double fill) {
  switch (f) {
    case CellFlag::Gas: return 0.0;
    case CellFlag::Liquid: return 1.0;
    default: return fill;  // Interface
  }
}

}  // namespace

void smooth_fill(SimState& s, const Params& p, const BoundaryRules& rules,
                 ThreadPool* pool) {
  const GridDims& d = s.dims;
  const int px = d.px(), py = d.py(), pz = d.pz();
  double cos_theta = 0.0;
  if (std::abs(p.contact_angle_deg - 90.0) > 1e-12)
    cos_theta = std::cos(p.contact_angle_deg * M_PI / 180.0);

  // Effective fill: gas 0, liquid 1, interface epsilon; solid cells get a
  // virtual level from the neighborhood average shifted by cos(theta) so the
  // smoothed gradient meets the wall at the contact angle.
  double* eff = s.scratch_a.data();
  for_chunks(pool, pz, [&](int z) {
    for (int y = 0; y < py; ++y)
      for (int x = 0; x < px; ++x) {
        const std::size_t c = d.idx(x, y, z);
        const CellFlag f = s.flag[c];
        if (f != CellFlag::Solid) {
          eff[c] = effective_fill_nonsolid(f, s.fill[c]);
          continue;
        }
        double sum = 0.0;
        int cnt = 0;
        for (const auto& o : hood().off) {
          const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (nx < 0 || nx >= px || ny < 0 || ny >= py || nz < 0 || nz >= pz)
            continue;
          const std::size_t nc = d.idx(nx, ny, nz);
          const CellFlag nf = s.flag[nc];
          if (nf == CellFlag::Solid) continue;
          sum += effective_fill_nonsolid(nf, s.fill[nc]);
          ++cnt;
        }
        const double base = cnt > 0 ? sum / cnt : s.fill[c];
        eff[c] = std::clamp(base + cos_theta, 0.0, 1.0);
      }
  });

  // Separable [1 2 1]/4 pass per axis (clamped at the padded bounds).
  double* a = s.scratch_a.data();
  double* b = s.scratch_b.data();
  double* out = s.fill_smooth.data();
  for_chunks(pool, pz, [&](int z) {
    for (int y = 0; y < py; ++y)
      for (int x = 0; x < px; ++x) {
        const int xm = x > 0 ? x - 1 : x, xp = x < px - 1 ? x + 1 : x;
        b[d.idx(x, y, z)] = 0.25 * (a[d.idx(xm, y, z)] +
                                    2.0 * a[d.idx(x, y, z)] +
                                    a[d.idx(xp, y, z)]);
      }
  });
  for_chunks(pool, pz, [&](int z) {
    for (int y = 0; y < py; ++y) {
      const int ym = y > 0 ? y - 1 : y, yp = y < py - 1 ? y + 1 : y;
      for (int x = 0; x < px; ++x)
        a[d.idx(x, y, z)] = 0.25 * (b[d.idx(x, ym, z)] +
                                    2.0 * b[d.idx(x, y, z)] +
                                    b[d.idx(x, yp, z)]);
    }
  });
  for_chunks(pool, pz, [&](int z) {
    const int zm = z > 0 ? z - 1 : z, zp = z < pz - 1 ? z + 1 : z;
    for (int y = 0; y < py; ++y)
      for (int x = 0; x < px; ++x)
        out[d.idx(x, y, z)] = 0.25 * (a[d.idx(x, y, zm)] +
                                      2.0 * a[d.idx(x, y, z)] +
                                      a[d.idx(x, y, zp)]);
  });

  // Halo images of the smoothed field for the non-wall faces (the clamped
  // sweeps above are exact only for walls, where the virtual fill governs).
  auto wrap_face = [&](int axis, bool low, FaceRule rule) {
    if (rule == FaceRule::Wall) return;
    const int n[3] = {d.nx, d.ny, d.nz};
    const int pn[3] = {px, py, pz};
    const int halo = low ? 0 : pn[axis] - 1;
    const int src = rule == FaceRule::Periodic ? (low ? n[axis] : 1)
                                               : (low ? 1 : n[axis]);
    const int a1 = axis == 0 ? 1 : 0;
    const int a2 = axis == 2 ? 1 : 2;
    for (int j = 0; j < pn[a2]; ++j)
      for (int i = 0; i < pn[a1]; ++i) {
        int cd[3], cs[3];
        cd[axis] = halo; cd[a1] = i; cd[a2] = j;
        cs[axis] = src;  cs[a1] = i; cs[a2] = j;
        out[d.idx(cd[0], cd[1], cd[2])] = out[d.idx(cs[0], cs[1], cs[2])];
      }
  };
  wrap_face(0, true, rules.x_lo);
  wrap_face(0, false, rules.x_hi);
  wrap_face(1, true, rules.y_lo);
  wrap_face(1, false, rules.y_hi);
  wrap_face(2, true, rules.z_lo);
  wrap_face(2, false, rules.z_hi);
}

namespace {

/// Unit inward gradient (direction of increasing smoothed fill) at any
/// padded cell, clamped one-sided at the array edge. Returns false when the
/// gradient magnitude is below the degeneracy threshold.
inline bool unit_gradient(const SimState& s, int x, int y, int z,
                          double& gx, double& gy, double& gz) {
  const GridDims& d = s.dims;
  const int px = d.px(), py = d.py(), pz = d.pz();
  const double* f = s.fill_smooth.data();
  const int xm = x > 0 ? x - 1 : x, xp = x < px - 1 ? x + 1 : x;
  const int ym = y > 0 ? y - 1 : y, yp = y < py - 1 ? y + 1 : y;
  const int zm = z > 0 ? z - 1 : z, zp = z < pz - 1 ? z + 1 : z;
  gx = 0.5 * (f[d.idx(xp, y, z)] - f[d.idx(xm, y, z)]);
  gy = 0.5 * (f[d.idx(x, yp, z)] - f[d.idx(x, ym, z)]);
  gz = 0.5 * (f[d.idx(x, y, zp)] - f[d.idx(x, y, zm)]);
  const double mag = std::sqrt(gx * gx + gy * gy + gz * gz);
  if (mag < 1e-8) return false;
  gx /= mag;
  gy /= mag;
  gz /= mag;
  return true;
}

}  // namespace

void update_geometry(SimState& s, ThreadPool* pool) {
  const GridDims& d = s.dims;
  for_chunks(pool, d.nz, [&](int zi) {
    const int z = zi + 1;
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] != CellFlag::Interface) continue;
        double gx, gy, gz;
        if (!unit_gradient(s, x, y, z, gx, gy, gz)) {
          // Degenerate: point the normal along the steepest raw fill-level
          // drop in the neighborhood (toward the emptiest side).
          int best = -1;
          double best_fill = 2.0;
          for (int k = 0; k < 26; ++k) {
            const auto& o = hood().off[k];
            const std::size_t nc = d.idx(x + o[0], y + o[1], z + o[2]);
            const CellFlag nf = s.flag[nc];
            if (nf == CellFlag::Solid) continue;
            const double ef = effective_fill_nonsolid(nf, s.fill[nc]);
            if (ef < best_fill) {
              best_fill = ef;
              best = k;
            }
          }
          if (best >= 0) {
            s.nx_[c] = static_cast<float>(hood().unit[best][0]);
            s.ny_[c] = static_cast<float>(hood().unit[best][1]);
            s.nz_[c] = static_cast<float>(hood().unit[best][2]);
          } else {
            s.nx_[c] = 0.f;
            s.ny_[c] = 0.f;
            s.nz_[c] = 1.f;
          }
          s.curvature[c] = 0.f;
          continue;
        }
        // Outward normal: opposite the fill gradient.
        s.nx_[c] = static_cast<float>(-gx);
        s.ny_[c] = static_cast<float>(-gy);
        s.nz_[c] = static_cast<float>(-gz);

        // Curvature as the divergence of the outward normal field
        // (positive over a droplet, so the Laplace pressure 2*sigma*kappa
        // raises the interior density).
        double div = 0.0;
        double ax, ay, az;
        if (unit_gradient(s, x + 1, y, z, ax, ay, az)) div -= 0.5 * ax;
        if (unit_gradient(s, x - 1, y, z, ax, ay, az)) div += 0.5 * ax;
        if (unit_gradient(s, x, y + 1, z, ax, ay, az)) div -= 0.5 * ay;
        if (unit_gradient(s, x, y - 1, z, ax, ay, az)) div += 0.5 * ay;
        if (unit_gradient(s, x, y, z + 1, ax, ay, az)) div -= 0.5 * az;
        if (unit_gradient(s, x, y, z - 1, ax, ay, az)) div += 0.5 * az;
        s.curvature[c] = static_cast<float>(std::clamp(div, -1.0, 1.0));
      }
  });
}

void exchange_mass(SimState& s, ThreadPool* pool) {
  const GridDims& d = s.dims;
  for_chunks(pool, d.nz, [&](int zi) {
    const int z = zi + 1;
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] != CellFlag::Interface) continue;
        const double eps_c = s.fill[c];
        double dm = 0.0;
        for (int i = 1; i < stencil::Q; ++i) {
          const std::size_t nb = d.idx(x + stencil::E[i][0],
                                       y + stencil::E[i][1],
                                       z + stencil::E[i][2]);
          const CellFlag nf = s.flag[nb];
          if (nf == CellFlag::Liquid) {
            dm += s.pdf.f_cur(stencil::INV[i])[nb] - s.pdf.f_cur(i)[c];
          } else if (nf == CellFlag::Interface) {
            const double scale = 0.5 * (eps_c + s.fill[nb]);
            dm += scale * (s.pdf.f_cur(stencil::INV[i])[nb] -
                           s.pdf.f_cur(i)[c]);
          }
          // Gas links carry no mass; solid links net zero under bounce-back.
        }
        s.mass[c] += dm;
      }
  });
}

namespace {

bool wrap_to_interior(const GridDims& d, const BoundaryRules& rules, int& x,
                      int& y, int& z);

/// Mean (rho, u, E) over the non-gas neighborhood, for initializing a cell
/// freshly promoted from gas. Solids contribute energy only.
void neighborhood_average(const SimState& s, const BoundaryRules& rules,
                          int x, int y, int z, double rho0, double& rho,
                          double& ux, double& uy, double& uz, double& energy) {
  const GridDims& d = s.dims;
  double sr = 0, sx = 0, sy = 0, sz = 0, se = 0;
  int n_flow = 0, n_mat = 0;
  for (const auto& o : hood().off) {
    int nx = x + o[0], ny = y + o[1], nz = z + o[2];
    if (!wrap_to_interior(d, rules, nx, ny, nz)) continue;
    const std::size_t nc = d.idx(nx, ny, nz);
    const CellFlag nf = s.flag[nc];
    if (nf == CellFlag::Gas) continue;
    se += s.energy[nc];
    ++n_mat;
    if (nf == CellFlag::Solid) continue;
    sr += s.rho[nc];
    sx += s.ux[nc];
    sy += s.uy[nc];
    sz += s.uz[nc];
    ++n_flow;
  }
  if (n_flow > 0) {
    rho = sr / n_flow;
    ux = sx / n_flow;
    uy = sy / n_flow;
    uz = sz / n_flow;
  } else {
    rho = rho0;
    ux = uy = uz = 0.0;
  }
  energy = n_mat > 0 ? se / n_mat : 0.0;
}

void set_equilibrium(SimState& s, std::size_t c, double rho, double ux,
                     double uy, double uz, double energy) {
  std::array<double, stencil::Q> fe, he;
  equilibrium_f(rho, ux, uy, uz, fe);
  equilibrium_h(energy, ux, uy, uz, he);
  for (int i = 0; i < stencil::Q; ++i) {
    s.pdf.f_cur(i)[c] = fe[i];
    s.pdf.h_cur(i)[c] = he[i];
  }
  s.rho[c] = rho;
  s.ux[c] = ux;
  s.uy[c] = uy;
  s.uz[c] = uz;
  s.energy[c] = energy;
}

/// Maps a (possibly out-of-interior) neighbor coordinate to its interior
/// cell, wrapping across periodic faces. Returns false for neighbors lying
/// beyond wall/outflow faces (no interior counterpart).
bool wrap_to_interior(const GridDims& d, const BoundaryRules& rules, int& x,
                      int& y, int& z) {
  auto wrap1 = [](int& v, int n, FaceRule lo, FaceRule hi) {
    if (v < 1) {
      if (lo != FaceRule::Periodic) return false;
      v += n;
    } else if (v > n) {
      if (hi != FaceRule::Periodic) return false;
      v -= n;
    }
    return true;
  };
  return wrap1(x, d.nx, rules.x_lo, rules.x_hi) &&
         wrap1(y, d.ny, rules.y_lo, rules.y_hi) &&
         wrap1(z, d.nz, rules.z_lo, rules.z_hi);
}

/// Hands surplus (or deficit) mass of a converting cell to its interface
/// neighbors, weighted by how well the neighbor direction aligns with the
/// cell's surface normal; equal weights when alignment degenerates; the
/// global ledger absorbs it when no interface neighbor exists.
void distribute_excess(SimState& s, const BoundaryRules& rules, int x, int y,
                       int z, double excess) {
  if (excess == 0.0) return;
  const GridDims& d = s.dims;
  const std::size_t c = d.idx(x, y, z);
  std::array<std::size_t, 26> targets;
  std::array<double, 26> weights;
  int n = 0;
  double wsum = 0.0;
  const double nxv = s.nx_[c], nyv = s.ny_[c], nzv = s.nz_[c];
  for (int k = 0; k < 26; ++k) {
    const auto& o = hood().off[k];
    int tx = x + o[0], ty = y + o[1], tz = z + o[2];
    if (!wrap_to_interior(d, rules, tx, ty, tz)) continue;
    const std::size_t tc = d.idx(tx, ty, tz);
    if (s.flag[tc] != CellFlag::Interface) continue;
    const auto& u = hood().unit[k];
    const double w = std::abs(nxv * u[0] + nyv * u[1] + nzv * u[2]);
    targets[n] = tc;
    weights[n] = w;
    wsum += w;
    ++n;
  }
  if (n == 0) {
    s.excess_mass_ledger += excess;
    return;
  }
  if (wsum < 1e-12) {
    for (int k = 0; k < n; ++k) weights[k] = 1.0;
    wsum = n;
  }
  for (int k = 0; k < n; ++k) s.mass[targets[k]] += excess * (weights[k] / wsum);
}

}  // namespace

ConversionReport convert_cells(SimState& s, const Params& p,
                               const BoundaryRules& rules, double rho0) {
  ConversionReport rep;
  const GridDims& d = s.dims;
  const double delta = p.conversion_delta;

  std::vector<std::array<int, 3>> fills, empties;
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] != CellFlag::Interface) continue;
        const double rho = s.rho[c];
        if (s.mass[c] > (1.0 + delta) * rho)
          fills.push_back({x, y, z});
        else if (s.mass[c] < -delta * rho)
          empties.push_back({x, y, z});
      }

  for (const auto& cell : fills) {
    const int x = cell[0], y = cell[1], z = cell[2];
    const std::size_t c = d.idx(x, y, z);
    if (s.flag[c] != CellFlag::Interface) continue;
    const double excess = s.mass[c] - s.rho[c];
    s.flag[c] = CellFlag::Liquid;
    s.mass[c] = 0.0;
    s.fill[c] = 1.0;
    ++rep.filled;
    // Closure: a liquid cell may not touch gas anywhere in the
    // 26-neighborhood; promote gas neighbors to interface.
    for (const auto& o : hood().off) {
      int gx = x + o[0], gy = y + o[1], gz = z + o[2];
      if (!wrap_to_interior(d, rules, gx, gy, gz)) continue;
      const std::size_t gc = d.idx(gx, gy, gz);
      if (s.flag[gc] != CellFlag::Gas) continue;
      s.flag[gc] = CellFlag::Interface;
      s.ever_fluid[gc] = 1;
      s.mass[gc] = 0.0;
      s.fill[gc] = 0.0;
      double rho, ux, uy, uz, energy;
      neighborhood_average(s, rules, gx, gy, gz, rho0, rho, ux, uy, uz,
                           energy);
      set_equilibrium(s, gc, rho, ux, uy, uz, energy);
      ++rep.opened;
    }
    distribute_excess(s, rules, x, y, z, excess);
  }

  for (const auto& cell : empties) {
    const int x = cell[0], y = cell[1], z = cell[2];
    const std::size_t c = d.idx(x, y, z);
    if (s.flag[c] != CellFlag::Interface) continue;
    const double deficit = s.mass[c];
    s.flag[c] = CellFlag::Gas;
    s.mass[c] = 0.0;
    s.fill[c] = 0.0;
    for (int i = 0; i < stencil::Q; ++i) {
      s.pdf.f_cur(i)[c] = 0.0;
      s.pdf.h_cur(i)[c] = 0.0;
    }
    s.rho[c] = 0.0;
    s.ux[c] = s.uy[c] = s.uz[c] = 0.0;
    s.energy[c] = 0.0;
    ++rep.emptied;
    // Closure: liquid neighbors are now exposed; demote them to interface.
    for (const auto& o : hood().off) {
      int lx = x + o[0], ly = y + o[1], lz = z + o[2];
      if (!wrap_to_interior(d, rules, lx, ly, lz)) continue;
      const std::size_t lc = d.idx(lx, ly, lz);
      if (s.flag[lc] != CellFlag::Liquid) continue;
      s.flag[lc] = CellFlag::Interface;
      s.mass[lc] = s.rho[lc];
      s.fill[lc] = 1.0;
      ++rep.covered;
    }
    distribute_excess(s, rules, x, y, z, deficit);
  }

  // Defensive closure repair; cascades above should leave nothing to do.
  if (rep.filled + rep.emptied > 0) {
    for (int z = 1; z <= d.nz; ++z)
      for (int y = 1; y <= d.ny; ++y)
        for (int x = 1; x <= d.nx; ++x) {
          const std::size_t c = d.idx(x, y, z);
          if (s.flag[c] != CellFlag::Liquid) continue;
          bool exposed = false;
          for (const auto& o : hood().off) {
            if (s.flag[d.idx(x + o[0], y + o[1], z + o[2])] == CellFlag::Gas) {
              exposed = true;
              break;
            }
          }
          if (exposed) {
            s.flag[c] = CellFlag::Interface;
            s.mass[c] = s.rho[c];
            s.fill[c] = 1.0;
            ++rep.repaired;
          }
        }
  }

  // Fill levels track mass for all surviving interface cells.
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] != CellFlag::Interface) continue;
        const double rho = s.rho[c];
        s.fill[c] = rho > 1e-12 ? std::clamp(s.mass[c] / rho, 0.0, 1.0) : 0.0;
      }
  return rep;
}

double total_mass(const SimState& s, double rho0) {
  const GridDims& d = s.dims;
  Kahan sum;
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        switch (s.flag[c]) {
          case CellFlag::Liquid: sum.add(s.rho[c]); break;
          case CellFlag::Interface: sum.add(s.mass[c]); break;
          case CellFlag::Solid: sum.add(s.fill[c] * rho0); break;
          case CellFlag::Gas: break;
        }
      }
  sum.add(s.excess_mass_ledger);
  return sum.value();
}

bool closure_violated(const SimState& s) {
  const GridDims& d = s.dims;
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] != CellFlag::Liquid) continue;
        for (const auto& o : hood().off)
          if (s.flag[d.idx(x + o[0], y + o[1], z + o[2])] == CellFlag::Gas)
            return true;
      }
  return false;
}

}  // namespace free_surface
}  // namespace ebm
