#include "ebm/powder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ebm {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Volume of the sphere at height zc below the horizontal plane z = z_plane
/// (spherical-cap formula, clamped to [0, full volume]).
double volume_below_plane(double zc, double r, double z_plane) {
  const double h = std::clamp(z_plane - (zc - r), 0.0, 2.0 * r);
  return kPi * h * h * (3.0 * r - h) / 3.0;
}

/// Volume of the sphere at height zc that lies inside the slab
/// z_lo <= z <= z_hi.
double slab_overlap_volume(double zc, double r, double z_lo, double z_hi) {
  return volume_below_plane(zc, r, z_hi) - volume_below_plane(zc, r, z_lo);
}

/// One inverse-Gaussian draw via the Michael–Schucany–Haas transform.
double inverse_gaussian(double mu, double lambda, Rng& rng) {
  const double nu = rng.normal();
  const double y = nu * nu;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   mu / (2.0 * lambda) *
                       std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  const double u = rng.uniform();
  if (u <= mu / (mu + x)) return x;
  return mu * mu / x;
}

struct Contact {
  int sphere = -1;  // index into placed spheres; -1 = substrate
};

struct Packer {
  const PowderSpec& spec;
  double lx, ly;        // lateral domain extent (m)
  double z_sub;         // substrate top (m)
  double z_top;         // layer plane: tops must stay at or below this
  std::vector<Sphere>& placed;
  Rng& rng;

  static constexpr double kThetaStep = 0.02;  // rolling micro-step (rad)
  static constexpr int kMaxRollSteps = 20000;

  double contact_tol(double r_sum) const { return 1e-9 + 1e-7 * r_sum; }

  /// Highest resting z for a vertical drop of radius r at (x, y) starting
  /// at or below z_from: max over substrate and supporting spheres.
  double drop_z(double x, double y, double r, double z_from) const {
    double z = z_sub + r;
    for (const Sphere& s : placed) {
      const double rs = r + s.r;
      const double dx = x - s.x, dy = y - s.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 >= rs * rs) continue;
      const double zc = s.z + std::sqrt(rs * rs - d2);
      if (zc <= z_from + contact_tol(rs) && zc > z) z = zc;
    }
    return z;
  }

  /// Indices of spheres in contact with a candidate center (and whether the
  /// substrate is touched). Also reports any true interpenetration.
  void find_contacts(const Sphere& c, std::vector<int>& out,
                     bool& substrate) const {
    out.clear();
    for (int j = 0; j < static_cast<int>(placed.size()); ++j) {
      const Sphere& s = placed[j];
      const double rs = c.r + s.r;
      const double dx = c.x - s.x, dy = c.y - s.y, dz = c.z - s.z;
      const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (d <= rs + contact_tol(rs)) out.push_back(j);
    }
    substrate = c.z <= z_sub + c.r + contact_tol(c.r);
  }

  /// Pushes the center radially out of any sphere it interpenetrates,
  /// iterating until every pairwise distance is feasible (resolving one
  /// overlap can open another, so a fixed pass count is not enough).
  void project_feasible(Sphere& c) const {
    for (int pass = 0; pass < 64; ++pass) {
      bool moved = false;
      for (const Sphere& s : placed) {
        const double rs = c.r + s.r;
        double dx = c.x - s.x, dy = c.y - s.y, dz = c.z - s.z;
        double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d < 1e-15) {
          dz = 1.0;
          d = 1.0;
        }
        if (d < rs * (1.0 - 1e-14)) {
          // Overshoot by one part in 10^12 so round-off cannot reopen the
          // same overlap on the next pass.
          const double push = rs * (1.0 + 1e-12) / d;
          c.x = s.x + dx * push;
          c.y = s.y + dy * push;
          c.z = s.z + dz * push;
          moved = true;
        }
      }
      if (c.z < z_sub + c.r) {
        c.z = z_sub + c.r;
        moved = true;
      }
      if (!moved) return;
    }
  }

  /// Rolls around a single contact by increasing the polar angle of the
  /// center about the contact sphere. Returns false if the sphere rolls past
  /// the equator and detaches (caller re-drops).
  bool roll_single(Sphere& c, int j) const {
    const Sphere& s = placed[j];
    const double rs = c.r + s.r;
    double vx = c.x - s.x, vy = c.y - s.y, vz = c.z - s.z;
    double hx = vx, hy = vy;
    double hmag = std::sqrt(hx * hx + hy * hy);
    if (hmag < 1e-12 * rs) {
      // Balanced on the apex: pick an azimuth (deterministic stream).
      const double a = 2.0 * kPi * rng.uniform();
      hx = std::cos(a);
      hy = std::sin(a);
      hmag = 1.0;
    }
    hx /= hmag;
    hy /= hmag;
    const double theta = std::atan2(std::sqrt(vx * vx + vy * vy), vz);
    const double t2 = theta + kThetaStep;
    if (t2 >= 0.5 * kPi) return false;  // past the equator: detaches
    c.x = s.x + rs * std::sin(t2) * hx;
    c.y = s.y + rs * std::sin(t2) * hy;
    c.z = s.z + rs * std::cos(t2);
    return true;
  }

  /// Descends along the circle of centers that keeps two contacts. Returns
  /// false when the circle's lowest point is reached (rest) via *rest=true,
  /// or degenerates to a single-contact roll via *rest=false.
  bool roll_double(Sphere& c, int j, int k, bool* rest) const {
    *rest = false;
    const Sphere& a = placed[j];
    const Sphere& b = placed[k];
    const double ra = c.r + a.r, rb = c.r + b.r;
    double ax = b.x - a.x, ay = b.y - a.y, az = b.z - a.z;
    const double d = std::sqrt(ax * ax + ay * ay + az * az);
    if (d < 1e-12) return false;  // coincident supports: fall back
    ax /= d;
    ay /= d;
    az /= d;
    const double t = (d * d + ra * ra - rb * rb) / (2.0 * d);
    const double rho2 = ra * ra - t * t;
    if (rho2 <= 1e-24) return false;
    const double rho = std::sqrt(rho2);
    const double qx = a.x + t * ax, qy = a.y + t * ay, qz = a.z + t * az;
    // Orthonormal basis of the circle plane: e1 = axis x ref, e2 = axis x e1.
    double e1x, e1y, e1z;
    if (std::abs(az) < 0.9) {  // ref = z-hat
      e1x = ay;
      e1y = -ax;
      e1z = 0.0;
    } else {  // ref = x-hat
      e1x = 0.0;
      e1y = az;
      e1z = -ay;
    }
    double m = std::sqrt(e1x * e1x + e1y * e1y + e1z * e1z);
    e1x /= m;
    e1y /= m;
    e1z /= m;
    const double e2x = ay * e1z - az * e1y;
    const double e2y = az * e1x - ax * e1z;
    const double e2z = ax * e1y - ay * e1x;
    // Current angle on the circle.
    const double wx = c.x - qx, wy = c.y - qy, wz = c.z - qz;
    const double c1 = wx * e1x + wy * e1y + wz * e1z;
    const double c2 = wx * e2x + wy * e2y + wz * e2z;
    const double phi = std::atan2(c2, c1);
    const double dz_dphi = rho * (-std::sin(phi) * e1z + std::cos(phi) * e2z);
    if (std::abs(dz_dphi) < 1e-12 * ra) {
      // At an extremum; rest only if it is the bottom of the circle.
      const double d2z = -rho * (std::cos(phi) * e1z + std::sin(phi) * e2z);
      if (d2z > 0.0) {
        *rest = true;
        return false;
      }
      return false;  // balanced on top of the circle: treat as single roll
    }
    const double dir = dz_dphi > 0.0 ? -1.0 : 1.0;
    const double p2 = phi + dir * kThetaStep;
    c.x = qx + rho * (std::cos(p2) * e1x + std::sin(p2) * e2x);
    c.y = qy + rho * (std::cos(p2) * e1y + std::sin(p2) * e2y);
    c.z = qz + rho * (std::cos(p2) * e1z + std::sin(p2) * e2z);
    return true;
  }

  /// Drops one sphere at (x, y) and rolls it to rest. Returns true and the
  /// final position on success; false if it never stabilizes.
  bool settle(double x, double y, double r, Sphere& out) const {
    Sphere c{x, y, 0.0, r};
    c.z = drop_z(x, y, r, 1e30);
    std::vector<int> contacts;
    bool substrate = false;
    for (int it = 0; it < kMaxRollSteps; ++it) {
      project_feasible(c);
      find_contacts(c, contacts, substrate);
      if (substrate || contacts.size() >= 3) {
        out = c;
        return true;
      }
      if (contacts.empty()) {
        c.z = drop_z(c.x, c.y, c.r, c.z);
        continue;
      }
      if (contacts.size() == 1) {
        if (!roll_single(c, contacts[0])) {
          // Detached past the equator: free fall from just outside.
          c.z = drop_z(c.x, c.y, c.r, c.z - 1e-12);
        }
        continue;
      }
      bool rest = false;
      if (!roll_double(c, contacts[0], contacts[1], &rest)) {
        if (rest) {
          out = c;
          return true;
        }
        if (!roll_single(c, contacts[0]))
          c.z = drop_z(c.x, c.y, c.r, c.z - 1e-12);
      }
    }
    return false;
  }
};

}  // namespace

void PowderSpec::validate() const {
  if (!(layer_thickness_m >= 0)) throw std::invalid_argument("layer thickness must be >= 0");
  if (!(mu_d_m > 0) || !(lambda_d_m > 0))
    throw std::invalid_argument("particle size distribution parameters must be positive");
  if (!(d_min_m < d_max_m))
    throw std::invalid_argument("degenerate diameter truncation window");
  if (!(phi_target > 0 && phi_target < 1))
    throw std::invalid_argument("packing fraction target must be in (0,1)");
}

std::vector<double> sample_diameters(const PowderSpec& spec, int n, Rng& rng) {
  spec.validate();
  std::vector<double> d;
  d.reserve(n);
  for (int i = 0; i < n; ++i) {
    double x = 0.0;
    int guard = 0;
    do {
      x = inverse_gaussian(spec.mu_d_m, spec.lambda_d_m, rng);
      if (++guard > 100000)
        throw std::runtime_error("diameter truncation window rejects everything");
    } while (x < spec.d_min_m || x > spec.d_max_m);
    d.push_back(x);
  }
  return d;
}

BedResult generate_bed(const PowderSpec& spec, const UnitScales& scales,
                       const GridDims& dims) {
  spec.validate();
  BedResult bed;
  if (spec.layer_thickness_m <= 0.0 || spec.phi_target <= 0.0) return bed;

  const double lx = dims.nx * scales.dx_m;
  const double ly = dims.ny * scales.dx_m;
  const double z_sub = spec.substrate_height_m;
  const double z_top = z_sub + spec.layer_thickness_m;
  if (z_top > dims.nz * scales.dx_m)
    throw std::invalid_argument("domain too shallow for substrate plus layer");

  Rng rng(spec.seed);
  Packer packer{spec, lx, ly, z_sub, z_top, bed.spheres, rng};

  const double slab_volume = lx * ly * spec.layer_thickness_m;
  const double volume_goal = spec.phi_target * slab_volume;
  const double z_domain = dims.nz * scales.dx_m;
  double volume_placed = 0.0;

  // Particles may protrude above the layer plane into the headspace (the
  // packing fraction is audited over the layer slab only); a placement
  // failure for one sampled diameter does not end the bed -- a smaller
  // particle may still fit -- so resample until the failure budget is spent.
  const int failure_budget = 64;
  while (volume_placed < volume_goal &&
         bed.placement_failures < failure_budget) {
    const double diam = sample_diameters(spec, 1, rng)[0];
    const double r = 0.5 * diam;
    bool placed_one = false;
    for (int attempt = 0; attempt < spec.max_attempts_per_particle; ++attempt) {
      const double margin = std::min(r, 0.5 * lx);
      const double my = std::min(r, 0.5 * ly);
      const double x = margin + rng.uniform() * (lx - 2.0 * margin);
      const double y = my + rng.uniform() * (ly - 2.0 * my);
      Sphere s;
      if (!packer.settle(x, y, r, s)) continue;
      if (s.z + s.r > z_domain - 1e-12) continue;  // no room above the pile
      if (s.z - r >= z_top) continue;  // rests entirely above the layer slab
      bed.spheres.push_back(s);
      volume_placed += slab_overlap_volume(s.z, r, z_sub, z_top);
      placed_one = true;
      break;
    }
    if (!placed_one) ++bed.placement_failures;
  }
  return bed;
}

void rasterize_bed(SimState& s, BedResult& bed, const PowderSpec& spec,
                   const UnitScales& scales) {
  const GridDims& d = s.dims;
  const double dx = scales.dx_m;
  const double z_sub = spec.substrate_height_m;

  for (int z = 1; z <= d.nz; ++z) {
    const double cz = (z - 0.5) * dx;
    const CellFlag fl = cz < z_sub ? CellFlag::Solid : CellFlag::Gas;
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        const std::size_t c = d.idx(x, y, z);
        s.flag[c] = fl;
        s.fill[c] = fl == CellFlag::Solid ? 1.0 : 0.0;
      }
  }

  for (const Sphere& sp : bed.spheres) {
    const int x0 = std::max(1, static_cast<int>(std::floor((sp.x - sp.r) / dx + 0.5)));
    const int x1 = std::min(d.nx, static_cast<int>(std::ceil((sp.x + sp.r) / dx + 0.5)));
    const int y0 = std::max(1, static_cast<int>(std::floor((sp.y - sp.r) / dx + 0.5)));
    const int y1 = std::min(d.ny, static_cast<int>(std::ceil((sp.y + sp.r) / dx + 0.5)));
    const int z0 = std::max(1, static_cast<int>(std::floor((sp.z - sp.r) / dx + 0.5)));
    const int z1 = std::min(d.nz, static_cast<int>(std::ceil((sp.z + sp.r) / dx + 0.5)));
    const double r2 = sp.r * sp.r;
    for (int z = z0; z <= z1; ++z) {
      const double dz = (z - 0.5) * dx - sp.z;
      for (int y = y0; y <= y1; ++y) {
        const double dy = (y - 0.5) * dx - sp.y;
        for (int x = x0; x <= x1; ++x) {
          const double ddx = (x - 0.5) * dx - sp.x;
          if (ddx * ddx + dy * dy + dz * dz <= r2) {
            const std::size_t c = d.idx(x, y, z);
            s.flag[c] = CellFlag::Solid;
            s.fill[c] = 1.0;
          }
        }
      }
    }
  }

  // Packing audit over the layer slab.
  const int zs0 = static_cast<int>(std::floor(z_sub / dx)) + 1;
  const int zs1 = std::min(
      d.nz, static_cast<int>(std::ceil((z_sub + spec.layer_thickness_m) / dx)));
  std::int64_t solid = 0, total = 0;
  for (int z = zs0; z <= zs1 && z >= 1; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) {
        ++total;
        if (s.flag[d.idx(x, y, z)] == CellFlag::Solid) ++solid;
      }
  bed.achieved_phi = total > 0 ? static_cast<double>(solid) / total : 0.0;
  bed.warning = bed.placement_failures > 0 ||
                std::abs(bed.achieved_phi - spec.phi_target) > 0.05;
}

}  // namespace ebm
