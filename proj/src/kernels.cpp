#include "ebm/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/lattice.hpp"
#include "ebm/parallel.hpp"

namespace ebm {

namespace {

constexpr std::uint8_t kWallHalo = 1;

template <class F>
void run_chunks(ThreadPool* pool, int n, F&& fn) {
  if (pool)
    pool->run(n, fn);
  else
    for (int c = 0; c < n; ++c) fn(c);
}

}  // namespace

struct SimTestAccess;

Simulation::Simulation(const SimParams& params, const GridDims& dims,
                       int threads)
    : p_(params) {
  p_.validate();
  s_.allocate(dims);
  wall_halo_mask_.assign(dims.padded_cells(), 0);
  if (threads > 1) pool_ = std::make_unique<ThreadPool>(threads);
  chunk_mass_.resize(dims.nz);
  chunk_energy_.resize(dims.nz);
  chunk_max_u2_.resize(dims.nz);
  chunk_max_e_.resize(dims.nz);
  chunk_iface_.resize(dims.nz);
  chunk_fluid_.resize(dims.nz);
  chunk_diverged_.resize(dims.nz);
}

Simulation::~Simulation() = default;

void Simulation::set_cell(int x, int y, int z, CellFlag flag, double fill) {
  const std::size_t c = s_.dims.idx(x, y, z);
  s_.flag[c] = flag;
  if (fill < 0.0) {
    switch (flag) {
      case CellFlag::Gas: fill = 0.0; break;
      case CellFlag::Interface: fill = 0.5; break;
      default: fill = 1.0; break;
    }
  }
  s_.fill[c] = fill;
}

void Simulation::build_halo_maps() {
  const GridDims& d = s_.dims;
  for (auto& v : halo_copy_) v.clear();
  wall_halo_.clear();
  std::fill(wall_halo_mask_.begin(), wall_halo_mask_.end(), 0);

  const int pn[3] = {d.px(), d.py(), d.pz()};
  const int n[3] = {d.nx, d.ny, d.nz};
  const FaceRule rules[3][2] = {{p_.boundary.x_lo, p_.boundary.x_hi},
                                {p_.boundary.y_lo, p_.boundary.y_hi},
                                {p_.boundary.z_lo, p_.boundary.z_hi}};
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = axis == 0 ? 1 : 0;
    const int a2 = axis == 2 ? 1 : 2;
    for (int side = 0; side < 2; ++side) {
      const FaceRule rule = rules[axis][side];
      const int halo = side == 0 ? 0 : pn[axis] - 1;
      int src;
      if (rule == FaceRule::Periodic)
        src = side == 0 ? n[axis] : 1;
      else
        src = side == 0 ? 1 : n[axis];
      for (int j = 0; j < pn[a2]; ++j)
        for (int i = 0; i < pn[a1]; ++i) {
          int cd[3], cs[3];
          cd[axis] = halo; cd[a1] = i; cd[a2] = j;
          cs[axis] = src;  cs[a1] = i; cs[a2] = j;
          const std::size_t dst = d.idx(cd[0], cd[1], cd[2]);
          if (rule == FaceRule::Wall) {
            wall_halo_.push_back(dst);
            wall_halo_mask_[dst] = kWallHalo;
          } else {
            halo_copy_[axis].emplace_back(dst, d.idx(cs[0], cs[1], cs[2]));
          }
        }
    }
  }
  // Static wall images: solid, full, no populations.
  for (const std::size_t c : wall_halo_) {
    s_.flag[c] = CellFlag::Solid;
    s_.fill[c] = 1.0;
    for (int i = 0; i < stencil::Q; ++i) {
      s_.pdf.f_cur(i)[c] = 0.0;
      s_.pdf.f_nxt(i)[c] = 0.0;
      s_.pdf.h_cur(i)[c] = 0.0;
      s_.pdf.h_nxt(i)[c] = 0.0;
    }
    s_.rho[c] = 0.0;
    s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
    s_.energy[c] = 0.0;
  }
}

void Simulation::refresh_halos() {
  const GridDims& d = s_.dims;
  double* f[stencil::Q];
  double* h[stencil::Q];
  for (int i = 0; i < stencil::Q; ++i) {
    f[i] = s_.pdf.f_cur(i);
    h[i] = s_.pdf.h_cur(i);
  }
  for (int stage = 0; stage < 3; ++stage) {
    for (const auto& [dst, src] : halo_copy_[stage]) {
      s_.flag[dst] = s_.flag[src];
      s_.fill[dst] = s_.fill[src];
      s_.rho[dst] = s_.rho[src];
      s_.ux[dst] = s_.ux[src];
      s_.uy[dst] = s_.uy[src];
      s_.uz[dst] = s_.uz[src];
      s_.energy[dst] = s_.energy[src];
      for (int i = 0; i < stencil::Q; ++i) {
        f[i][dst] = f[i][src];
        h[i][dst] = h[i][src];
      }
    }
  }
}

void Simulation::finalize_scene() {
  const GridDims& d = s_.dims;
  build_halo_maps();
  const double rho0 = p_.material.rho0;
  const double e0 = p_.material.initial_energy();
  std::array<double, stencil::Q> feq, heq;
  equilibrium_f(rho0, 0, 0, 0, feq);
  equilibrium_h(e0, 0, 0, 0, heq);

  has_gas_ = false;
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        switch (s_.flag[c]) {
          case CellFlag::Gas:
            has_gas_ = true;
            s_.fill[c] = 0.0;
            s_.mass[c] = 0.0;
            for (int i = 0; i < stencil::Q; ++i) {
              s_.pdf.f_cur(i)[c] = 0.0;
              s_.pdf.h_cur(i)[c] = 0.0;
            }
            s_.rho[c] = 0.0;
            s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
            s_.energy[c] = 0.0;
            break;
          case CellFlag::Liquid:
            s_.ever_fluid[c] = 1;
            s_.fill[c] = 1.0;
            s_.mass[c] = 0.0;
            for (int i = 0; i < stencil::Q; ++i) {
              s_.pdf.f_cur(i)[c] = feq[i];
              s_.pdf.h_cur(i)[c] = heq[i];
            }
            s_.rho[c] = rho0;
            s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
            s_.energy[c] = e0;
            break;
          case CellFlag::Interface:
            s_.ever_fluid[c] = 1;
            s_.mass[c] = s_.fill[c] * rho0;
            for (int i = 0; i < stencil::Q; ++i) {
              s_.pdf.f_cur(i)[c] = feq[i];
              s_.pdf.h_cur(i)[c] = heq[i];
            }
            s_.rho[c] = rho0;
            s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
            s_.energy[c] = e0;
            break;
          case CellFlag::Solid:
            s_.mass[c] = 0.0;
            for (int i = 0; i < stencil::Q; ++i) {
              s_.pdf.f_cur(i)[c] = feq[i];
              s_.pdf.h_cur(i)[c] = heq[i];
            }
            s_.rho[c] = s_.fill[c] * rho0;
            s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
            s_.energy[c] = e0;
            break;
        }
      }
  refresh_halos();

  // The interface layer must close off every liquid-gas contact.
  int n_iface = 0;
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        if (s_.flag[c] == CellFlag::Liquid) {
          bool exposed = false;
          for (int dz = -1; dz <= 1 && !exposed; ++dz)
            for (int dy = -1; dy <= 1 && !exposed; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                if (s_.flag[d.idx(x + dx, y + dy, z + dz)] == CellFlag::Gas) {
                  exposed = true;
                  break;
                }
              }
          if (exposed) {
            s_.flag[c] = CellFlag::Interface;
            s_.mass[c] = rho0;
            s_.fill[c] = 1.0;
          }
        }
        if (s_.flag[c] == CellFlag::Interface) ++n_iface;
      }
  refresh_halos();
  if (has_gas_) {
    free_surface::smooth_fill(s_, p_.surface, p_.boundary, pool_.get());
    free_surface::update_geometry(s_, pool_.get());
  }
  report_ = StepReport{};
  report_.n_interface = n_iface;
}

void Simulation::attach_beam(const BeamParams& beam, const ScanPath& path) {
  beam.validate();
  beam_ = beam;
  path_ = path;
  beam_step_units_ = beam.eta * beam.power_w() * p_.scales.dt_s *
                     p_.material.joule_to_energy;
}

bool Simulation::beam_done() const {
  if (!beam_) return false;
  return beam_position(path_, beam_->v_scan_m_s,
                       static_cast<double>(step_count_) * p_.scales.dt_s)
             .state == BeamSample::State::Done;
}

void Simulation::pin_energy(const std::vector<std::size_t>& cells,
                            double energy) {
  for (const std::size_t c : cells) pinned_.emplace_back(c, energy);
}

void Simulation::pin_energy_layer(int z, double energy) {
  const GridDims& d = s_.dims;
  std::vector<std::size_t> cells;
  for (int y = 1; y <= d.ny; ++y)
    for (int x = 1; x <= d.nx; ++x) {
      const std::size_t c = d.idx(x, y, z);
      if (s_.flag[c] == CellFlag::Solid) cells.push_back(c);
    }
  pin_energy(cells, energy);
}

void Simulation::apply_pins() {
  for (const auto& [c, e] : pinned_) {
    for (int i = 0; i < stencil::Q; ++i)
      s_.pdf.h_cur(i)[c] = stencil::W[i] * e;
    s_.energy[c] = e;
  }
}

void Simulation::beam_stage() {
  footprint_temps_.clear();
  report_.beam = BeamSample{};
  if (!beam_) return;
  const double t = static_cast<double>(step_count_) * p_.scales.dt_s;
  const BeamSample sample = beam_position(path_, beam_->v_scan_m_s, t);
  report_.beam = sample;
  if (sample.state == BeamSample::State::Done) return;
  ++beam_powered_steps_;
  if (sample.state == BeamSample::State::OffDomain) {
    beam_off_.add(beam_step_units_);
    return;
  }
  const DepositResult r =
      deposit(s_, p_.scales, sample.x_m, sample.y_m, beam_->sigma_spot_m,
              beam_step_units_);
  beam_dep_.add(r.deposited);
  beam_off_.add(r.off_domain);
  beam_trans_.add(r.transmitted);
  footprint_surface_temperatures(s_, p_.scales, p_.material, sample.x_m,
                                 sample.y_m, beam_->sigma_spot_m,
                                 footprint_temps_);
}

void Simulation::stream() {
  const GridDims& d = s_.dims;
  const double* fc[stencil::Q];
  const double* hc[stencil::Q];
  double* fn[stencil::Q];
  double* hn[stencil::Q];
  for (int i = 0; i < stencil::Q; ++i) {
    fc[i] = s_.pdf.f_cur(i);
    hc[i] = s_.pdf.h_cur(i);
    fn[i] = s_.pdf.f_nxt(i);
    hn[i] = s_.pdf.h_nxt(i);
  }
  const std::uint8_t* wall = wall_halo_mask_.data();
  const CellFlag* flag = s_.flag.data();
  const double amb = p_.surface.rho_ambient;
  const double sigma6 = 6.0 * p_.surface.sigma;

  run_chunks(pool_.get(), d.nz, [&](int zi) {
    const int z = zi + 1;
    // Upstream offsets in linear index space.
    std::ptrdiff_t up_off[stencil::Q];
    for (int i = 0; i < stencil::Q; ++i)
      up_off[i] = -static_cast<std::ptrdiff_t>(
          d.idx(1 + stencil::E[i][0], 1 + stencil::E[i][1],
                1 + stencil::E[i][2]) -
          d.idx(1, 1, 1));
    for (int y = 1; y <= d.ny; ++y) {
      const std::size_t row = d.idx(1, y, z);
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = row + (x - 1);
        const CellFlag fl = flag[c];
        if (fl == CellFlag::Gas) continue;

        if (fl == CellFlag::Solid) {
          // f is dead data in solid cells (melting re-initializes it from
          // equilibrium and neighbors bounce back off their own pdfs), so
          // only h streams.
          hn[0][c] = hc[0][c];
          for (int i = 1; i < stencil::Q; ++i) {
            const std::size_t up = c + up_off[i];
            const CellFlag uf = flag[up];
            if (uf == CellFlag::Gas || (uf == CellFlag::Solid && wall[up]))
              hn[i][c] = hc[stencil::INV[i]][c];
            else
              hn[i][c] = hc[i][up];
          }
          continue;
        }

        if (fl == CellFlag::Liquid) {
          fn[0][c] = fc[0][c];
          hn[0][c] = hc[0][c];
          for (int i = 1; i < stencil::Q; ++i) {
            const std::size_t up = c + up_off[i];
            const CellFlag uf = flag[up];
            if (uf == CellFlag::Solid) {
              fn[i][c] = fc[stencil::INV[i]][c];
              hn[i][c] = wall[up] ? hc[stencil::INV[i]][c] : hc[i][up];
            } else if (uf == CellFlag::Gas) {
              // Closure guarantees this never fires; reflect defensively.
              fn[i][c] = fc[stencil::INV[i]][c];
              hn[i][c] = hc[stencil::INV[i]][c];
            } else {
              fn[i][c] = fc[i][up];
              hn[i][c] = hc[i][up];
            }
          }
          continue;
        }

        // Interface: reconstruct the populations crossing the free surface
        // against a virtual gas at density rho_ambient plus the Laplace
        // pressure 2*sigma*kappa/cs^2.
        const double nx = s_.nx_[c], ny = s_.ny_[c], nz = s_.nz_[c];
        const double ux = s_.ux[c], uy = s_.uy[c], uz = s_.uz[c];
        const double rho_a = amb + sigma6 * s_.curvature[c];
        const double usq = 1.5 * (ux * ux + uy * uy + uz * uz);
        for (int i = 0; i < stencil::Q; ++i) {
          const std::size_t up = c + up_off[i];
          const CellFlag uf = flag[up];
          const double edotn = stencil::E[i][0] * nx + stencil::E[i][1] * ny +
                               stencil::E[i][2] * nz;
          const bool gas_up = uf == CellFlag::Gas;
          if (gas_up || edotn <= 0.0) {
            // feq_i + feq_inv(i) at (rho_a, u): the odd velocity terms
            // cancel, leaving twice the even part.
            const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                              stencil::E[i][2] * uz;
            const double pair =
                2.0 * stencil::W[i] * rho_a * (1.0 + 4.5 * eu * eu - usq);
            fn[i][c] = pair - fc[stencil::INV[i]][c];
          } else if (uf == CellFlag::Solid) {
            fn[i][c] = fc[stencil::INV[i]][c];
          } else {
            fn[i][c] = fc[i][up];
          }
          if (i == 0) {
            hn[0][c] = hc[0][c];
          } else if (gas_up || (uf == CellFlag::Solid && wall[up])) {
            hn[i][c] = hc[stencil::INV[i]][c];
          } else {
            hn[i][c] = hc[i][up];
          }
        }
      }
    }
  });
  s_.pdf.swap_buffers();
}

void Simulation::collide() {
  const GridDims& d = s_.dims;
  double* f[stencil::Q];
  double* h[stencil::Q];
  for (int i = 0; i < stencil::Q; ++i) {
    f[i] = s_.pdf.f_cur(i);
    h[i] = s_.pdf.h_cur(i);
  }
  const double inv_tau_f = 1.0 / p_.tau_f;
  const double inv_tau_h = 1.0 / p_.tau_h;
  const double gx = p_.gravity_lat[0], gy = p_.gravity_lat[1],
               gz = p_.gravity_lat[2];
  const bool gravity_on = gx != 0.0 || gy != 0.0 || gz != 0.0;
  const double u2_limit = p_.u_limit * p_.u_limit;
  const double neg_tol = p_.f_negative_tol;
  const double rho0 = p_.material.rho0;

  run_chunks(pool_.get(), d.nz, [&](int zi) {
    const int z = zi + 1;
    std::int64_t diverged = 0;
    for (int y = 1; y <= d.ny; ++y) {
      const std::size_t row = d.idx(1, y, z);
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = row + (x - 1);
        const CellFlag fl = s_.flag[c];
        if (fl == CellFlag::Gas) continue;

        const double eb = s_.beam_energy[c];

        if (fl == CellFlag::Solid) {
          double e = 0.0;
          for (int i = 0; i < stencil::Q; ++i) e += h[i][c];
          for (int i = 0; i < stencil::Q; ++i)
            h[i][c] += (stencil::W[i] * e - h[i][c]) * inv_tau_h +
                       stencil::W[i] * eb;
          s_.energy[c] = e + eb;
          s_.rho[c] = s_.fill[c] * rho0;
          s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
          continue;
        }

        double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0, e = 0.0;
        for (int i = 0; i < stencil::Q; ++i) {
          const double fi = f[i][c];
          rho += fi;
          mx += stencil::E[i][0] * fi;
          my += stencil::E[i][1] * fi;
          mz += stencil::E[i][2] * fi;
          e += h[i][c];
        }
        double ux = 0.0, uy = 0.0, uz = 0.0;
        if (rho > 1e-300) {
          ux = mx / rho;
          uy = my / rho;
          uz = mz / rho;
        }
        bool bad = !std::isfinite(rho) || !std::isfinite(ux + uy + uz) ||
                   !std::isfinite(e);
        const double u2 = ux * ux + uy * uy + uz * uz;
        if (u2 > u2_limit) {
          bad = true;
          const double scale = p_.u_limit / std::sqrt(u2);
          ux *= scale;
          uy *= scale;
          uz *= scale;
        }

        const double usq = 1.5 * (ux * ux + uy * uy + uz * uz);
        const double ug = ux * gx + uy * gy + uz * gz;
        bool went_negative = false;
        for (int i = 0; i < stencil::Q; ++i) {
          const double eu = stencil::E[i][0] * ux + stencil::E[i][1] * uy +
                            stencil::E[i][2] * uz;
          const double feq =
              stencil::W[i] * rho * (1.0 + 3.0 * eu + 4.5 * eu * eu - usq);
          double fi = f[i][c] + (feq - f[i][c]) * inv_tau_f;
          if (gravity_on) {
            const double eg = stencil::E[i][0] * gx + stencil::E[i][1] * gy +
                              stencil::E[i][2] * gz;
            fi += stencil::W[i] * rho * (3.0 * (eg - ug) + 9.0 * eu * eg);
          }
          if (fi < neg_tol) went_negative = true;
          f[i][c] = fi;
          const double heq = stencil::W[i] * e * (1.0 + 3.0 * eu);
          h[i][c] += (heq - h[i][c]) * inv_tau_h + stencil::W[i] * eb;
        }
        if (bad || went_negative) {
          if (!s_.diverged[c]) {
            s_.diverged[c] = 1;
            ++diverged;
          }
        }
        s_.rho[c] = rho;
        s_.ux[c] = ux;
        s_.uy[c] = uy;
        s_.uz[c] = uz;
        s_.energy[c] = e + eb;
      }
    }
    chunk_diverged_[zi] = diverged;
  });

  for (int zi = 0; zi < d.nz; ++zi) diverged_total_ += chunk_diverged_[zi];
  for (const std::size_t c : s_.beam_cells) s_.beam_energy[c] = 0.0;
  s_.beam_cells.clear();
}

void Simulation::refresh_macros() {
  const GridDims& d = s_.dims;
  const double rho0 = p_.material.rho0;
  run_chunks(pool_.get(), d.nz, [&](int zi) {
    const int z = zi + 1;
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        const CellFlag fl = s_.flag[c];
        if (fl == CellFlag::Gas) continue;
        double e = 0.0;
        for (int i = 0; i < stencil::Q; ++i) e += s_.pdf.h_cur(i)[c];
        s_.energy[c] = e;
        if (fl == CellFlag::Solid) {
          s_.rho[c] = s_.fill[c] * rho0;
          s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
          continue;
        }
        double rho = 0.0, mx = 0.0, my = 0.0, mz = 0.0;
        for (int i = 0; i < stencil::Q; ++i) {
          const double fi = s_.pdf.f_cur(i)[c];
          rho += fi;
          mx += stencil::E[i][0] * fi;
          my += stencil::E[i][1] * fi;
          mz += stencil::E[i][2] * fi;
        }
        s_.rho[c] = rho;
        if (rho > 1e-300) {
          s_.ux[c] = mx / rho;
          s_.uy[c] = my / rho;
          s_.uz[c] = mz / rho;
        } else {
          s_.ux[c] = s_.uy[c] = s_.uz[c] = 0.0;
        }
      }
  });
}

StepReport Simulation::make_report() {
  const GridDims& d = s_.dims;
  run_chunks(pool_.get(), d.nz, [&](int zi) {
    const int z = zi + 1;
    Kahan mass, energy;
    double max_u2 = 0.0, max_e = -1e300;
    int n_iface = 0, n_fluid = 0;
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        const CellFlag fl = s_.flag[c];
        if (fl == CellFlag::Gas) continue;
        energy.add(s_.energy[c]);
        if (s_.energy[c] > max_e) max_e = s_.energy[c];
        switch (fl) {
          case CellFlag::Liquid:
            mass.add(s_.rho[c]);
            ++n_fluid;
            break;
          case CellFlag::Interface:
            mass.add(s_.mass[c]);
            ++n_fluid;
            ++n_iface;
            break;
          case CellFlag::Solid:
            mass.add(s_.fill[c] * p_.material.rho0);
            break;
          default: break;
        }
        if (fl != CellFlag::Solid) {
          const double u2 = s_.ux[c] * s_.ux[c] + s_.uy[c] * s_.uy[c] +
                            s_.uz[c] * s_.uz[c];
          if (u2 > max_u2) max_u2 = u2;
        }
      }
    chunk_mass_[zi] = mass;
    chunk_energy_[zi] = energy;
    chunk_max_u2_[zi] = max_u2;
    chunk_max_e_[zi] = max_e;
    chunk_iface_[zi] = n_iface;
    chunk_fluid_[zi] = n_fluid;
  });

  StepReport r;
  r.step = step_count_;
  Kahan mass, energy;
  double max_u2 = 0.0, max_e = -1e300;
  for (int zi = 0; zi < d.nz; ++zi) {
    mass.add(chunk_mass_[zi]);
    energy.add(chunk_energy_[zi]);
    max_u2 = std::max(max_u2, chunk_max_u2_[zi]);
    max_e = std::max(max_e, chunk_max_e_[zi]);
    r.n_interface += chunk_iface_[zi];
    r.n_fluid += chunk_fluid_[zi];
  }
  mass.add(s_.excess_mass_ledger);
  r.total_mass = mass.value();
  r.total_energy = energy.value();
  r.max_speed = std::sqrt(max_u2);
  r.max_temperature_k =
      max_e > -1e300 ? p_.material.temperature(max_e) : 0.0;
  r.diverged_cells = diverged_total_;
  r.beam = report_.beam;
  r.beam_deposited_units = beam_dep_.value();
  r.beam_off_domain_units = beam_off_.value();
  r.beam_transmitted_units = beam_trans_.value();
  r.beam_powered_steps = beam_powered_steps_;
  return r;
}

StepReport Simulation::step() {
  refresh_halos();
  const bool interfaces = report_.n_interface > 0;
  if (has_gas_ && interfaces) {
    free_surface::smooth_fill(s_, p_.surface, p_.boundary, pool_.get());
    free_surface::update_geometry(s_, pool_.get());
  }
  beam_stage();
  const BeamSample beam_now = report_.beam;
  if (has_gas_ && interfaces) free_surface::exchange_mass(s_, pool_.get());
  stream();
  collide();
  const phase_change::PhaseReport phase =
      phase_change::update_phase_state(s_, p_.material);
  free_surface::ConversionReport conversion;
  if (has_gas_)
    conversion = free_surface::convert_cells(s_, p_.surface, p_.boundary,
                                             p_.material.rho0);
  apply_pins();
  ++step_count_;
  report_ = make_report();
  report_.beam = beam_now;
  report_.phase = phase;
  report_.conversion = conversion;
  if (p_.divergence_abort_cells > 0 &&
      diverged_total_ >= p_.divergence_abort_cells)
    aborted_ = true;
  return report_;
}

}  // namespace ebm
