#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ebm/stencil.hpp"

namespace ebm {

/// Interior grid of nx*ny*nz cells surrounded by a one-cell halo layer.
/// Interior coordinates run 1..n per axis; halo cells carry boundary images
/// (periodic wraps, outflow copies, or wall markers). Linear index order is
/// x fastest, then y, then z.
struct GridDims {
  int nx = 0, ny = 0, nz = 0;

  GridDims() = default;
  GridDims(int nx_, int ny_, int nz_) : nx(nx_), ny(ny_), nz(nz_) {
    if (nx < 1 || ny < 1 || nz < 1)
      throw std::invalid_argument("grid dimensions must be positive");
  }

  int px() const { return nx + 2; }
  int py() const { return ny + 2; }
  int pz() const { return nz + 2; }
  std::size_t padded_cells() const {
    return static_cast<std::size_t>(px()) * py() * pz();
  }
  std::size_t interior_cells() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }

  std::size_t idx(int x, int y, int z) const {
    return static_cast<std::size_t>(z) * py() * px() +
           static_cast<std::size_t>(y) * px() + x;
  }
  bool in_interior(int x, int y, int z) const {
    return x >= 1 && x <= nx && y >= 1 && y <= ny && z >= 1 && z <= nz;
  }
};

enum class CellFlag : std::uint8_t { Gas = 0, Interface = 1, Liquid = 2, Solid = 3 };

enum class FaceRule : std::uint8_t { Wall = 0, Periodic = 1, Outflow = 2 };

/// Per-face boundary handling for the six domain faces.
struct BoundaryRules {
  FaceRule x_lo = FaceRule::Wall, x_hi = FaceRule::Wall;
  FaceRule y_lo = FaceRule::Wall, y_hi = FaceRule::Wall;
  FaceRule z_lo = FaceRule::Wall, z_hi = FaceRule::Outflow;
};

/// Double-buffered population storage (flow set f and energy set h),
/// structure-of-arrays with the direction index slowest so each direction
/// plane streams contiguously.
struct PdfBuffers {
  std::size_t cells = 0;
  std::vector<double> f[2];
  std::vector<double> h[2];
  int cur = 0;

  void allocate(std::size_t padded_cells) {
    cells = padded_cells;
    for (int b = 0; b < 2; ++b) {
      f[b].assign(static_cast<std::size_t>(stencil::Q) * padded_cells, 0.0);
      h[b].assign(static_cast<std::size_t>(stencil::Q) * padded_cells, 0.0);
    }
  }

  double* f_cur(int i) { return f[cur].data() + static_cast<std::size_t>(i) * cells; }
  double* f_nxt(int i) { return f[1 - cur].data() + static_cast<std::size_t>(i) * cells; }
  double* h_cur(int i) { return h[cur].data() + static_cast<std::size_t>(i) * cells; }
  double* h_nxt(int i) { return h[1 - cur].data() + static_cast<std::size_t>(i) * cells; }
  const double* f_cur(int i) const { return f[cur].data() + static_cast<std::size_t>(i) * cells; }
  const double* h_cur(int i) const { return h[cur].data() + static_cast<std::size_t>(i) * cells; }

  void swap_buffers() { cur = 1 - cur; }
};

/// Full mutable simulation state: cell classification, fill levels and mass
/// for the surface tracking, populations, and cached macroscopic fields.
/// All per-cell arrays are padded-size and indexed via GridDims::idx.
struct SimState {
  GridDims dims;

  std::vector<CellFlag> flag;
  std::vector<double> fill;     ///< fluid fraction: 1 liquid, 0 gas, partial otherwise
  std::vector<double> mass;     ///< tracked mass of interface cells
  PdfBuffers pdf;

  // Macroscopic caches, refreshed once per step after collision.
  std::vector<double> rho;
  std::vector<double> ux, uy, uz;
  std::vector<double> energy;

  // Beam deposition scratch: per-cell energy increment for the current step,
  // sparse (only `beam_cells` entries are nonzero).
  std::vector<double> beam_energy;
  std::vector<std::size_t> beam_cells;

  // Surface geometry for interface cells, rebuilt each step.
  std::vector<double> fill_smooth;
  std::vector<double> scratch_a, scratch_b;  ///< smoothing sweep buffers
  std::vector<float> nx_, ny_, nz_;     ///< outward (into gas) unit normal
  std::vector<float> curvature;

  std::vector<std::uint8_t> diverged;
  std::vector<std::uint8_t> ever_fluid;  ///< cell was liquid/interface at any time

  double excess_mass_ledger = 0.0;  ///< mass with no interface cell to carry it

  void allocate(const GridDims& d) {
    dims = d;
    const std::size_t n = d.padded_cells();
    flag.assign(n, CellFlag::Gas);
    fill.assign(n, 0.0);
    mass.assign(n, 0.0);
    pdf.allocate(n);
    rho.assign(n, 0.0);
    ux.assign(n, 0.0);
    uy.assign(n, 0.0);
    uz.assign(n, 0.0);
    energy.assign(n, 0.0);
    beam_energy.assign(n, 0.0);
    beam_cells.clear();
    fill_smooth.assign(n, 0.0);
    scratch_a.assign(n, 0.0);
    scratch_b.assign(n, 0.0);
    nx_.assign(n, 0.0f);
    ny_.assign(n, 0.0f);
    nz_.assign(n, 0.0f);
    curvature.assign(n, 0.0f);
    diverged.assign(n, 0);
    ever_fluid.assign(n, 0);
    excess_mass_ledger = 0.0;
  }
};

inline bool is_fluid(CellFlag f) {
  return f == CellFlag::Liquid || f == CellFlag::Interface;
}

}  // namespace ebm
