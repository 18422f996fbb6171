#include "ebm/snapshot.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace ebm {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

void put_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void put(std::ofstream& out, T v) {
  put_bytes(out, &v, sizeof v);
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    io_fail(path, "truncated file");
  return v;
}

double cell_temperature(const SimState& s, const MaterialParams& mat,
                        std::size_t c) {
  if (s.flag[c] == CellFlag::Gas) return mat.t_initial_k;
  return mat.temperature(s.energy[c]);
}

}  // namespace

void write_vtk(const SimState& s, const MaterialParams& mat,
               const UnitScales& scales, std::int64_t step,
               const std::string& path) {
  const GridDims& d = s.dims;
  std::ostringstream os;
  os.precision(9);
  os << "# vtk DataFile Version 3.0\n"
     << "melt simulation snapshot step " << step << "\n"
     << "ASCII\nDATASET STRUCTURED_POINTS\n"
     << "DIMENSIONS " << d.nx << " " << d.ny << " " << d.nz << "\n"
     << "ORIGIN 0 0 0\n"
     << "SPACING " << scales.dx_m << " " << scales.dx_m << " " << scales.dx_m
     << "\n"
     << "POINT_DATA " << d.interior_cells() << "\n";

  const auto for_cells = [&](auto&& fn) {
    for (int z = 1; z <= d.nz; ++z)
      for (int y = 1; y <= d.ny; ++y)
        for (int x = 1; x <= d.nx; ++x) fn(d.idx(x, y, z));
  };

  os << "SCALARS flag int 1\nLOOKUP_TABLE default\n";
  for_cells([&](std::size_t c) {
    os << static_cast<int>(s.flag[c]) << "\n";
  });
  os << "SCALARS fill double 1\nLOOKUP_TABLE default\n";
  for_cells([&](std::size_t c) { os << s.fill[c] << "\n"; });
  os << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
  for_cells([&](std::size_t c) { os << s.rho[c] << "\n"; });
  os << "VECTORS velocity double\n";
  for_cells([&](std::size_t c) {
    os << s.ux[c] << " " << s.uy[c] << " " << s.uz[c] << "\n";
  });
  os << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
  for_cells([&](std::size_t c) { os << cell_temperature(s, mat, c) << "\n"; });

  std::ofstream out = open_out(path, false);
  out << os.str();
  if (!out) io_fail(path, "write failed");
}

void write_sidecar(const SimState& s, const MaterialParams& mat,
                   const UnitScales& scales, std::int64_t step,
                   const std::string& path) {
  const GridDims& d = s.dims;
  std::ofstream out = open_out(path, true);
  char header[64] = {};
  std::memcpy(header, "EBMSNAP1", 8);
  const std::int64_t nx = d.nx, ny = d.ny, nz = d.nz;
  std::memcpy(header + 8, &nx, 8);
  std::memcpy(header + 16, &ny, 8);
  std::memcpy(header + 24, &nz, 8);
  std::memcpy(header + 32, &scales.dx_m, 8);
  std::memcpy(header + 40, &step, 8);
  put_bytes(out, header, sizeof header);

  const auto for_cells = [&](auto&& fn) {
    for (int z = 1; z <= d.nz; ++z)
      for (int y = 1; y <= d.ny; ++y)
        for (int x = 1; x <= d.nx; ++x) fn(d.idx(x, y, z));
  };
  for_cells([&](std::size_t c) {
    put(out, static_cast<std::uint8_t>(s.flag[c]));
  });
  for_cells([&](std::size_t c) { put(out, s.fill[c]); });
  for_cells([&](std::size_t c) { put(out, s.rho[c]); });
  for_cells([&](std::size_t c) { put(out, s.ux[c]); });
  for_cells([&](std::size_t c) { put(out, s.uy[c]); });
  for_cells([&](std::size_t c) { put(out, s.uz[c]); });
  for_cells([&](std::size_t c) { put(out, cell_temperature(s, mat, c)); });
  if (!out) io_fail(path, "write failed");
}

SidecarData read_sidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  char header[64];
  if (!in.read(header, sizeof header)) io_fail(path, "truncated header");
  if (std::memcmp(header, "EBMSNAP1", 8) != 0)
    io_fail(path, "bad magic (not a snapshot sidecar)");
  SidecarData r;
  std::memcpy(&r.nx, header + 8, 8);
  std::memcpy(&r.ny, header + 16, 8);
  std::memcpy(&r.nz, header + 24, 8);
  std::memcpy(&r.dx_m, header + 32, 8);
  std::memcpy(&r.step, header + 40, 8);
  if (r.nx < 1 || r.ny < 1 || r.nz < 1) io_fail(path, "bad dimensions");
  const std::size_t n =
      static_cast<std::size_t>(r.nx) * r.ny * static_cast<std::size_t>(r.nz);
  r.flag.resize(n);
  if (!in.read(reinterpret_cast<char*>(r.flag.data()),
               static_cast<std::streamsize>(n)))
    io_fail(path, "truncated flag array");
  const auto read_field = [&](std::vector<double>& v) {
    v.resize(n);
    if (!in.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(n * sizeof(double))))
      io_fail(path, "truncated field array");
  };
  read_field(r.fill);
  read_field(r.rho);
  read_field(r.ux);
  read_field(r.uy);
  read_field(r.uz);
  read_field(r.temperature);
  return r;
}

void write_bed(const SimState& s, const BedResult& bed,
               const UnitScales& scales, const std::string& path) {
  const GridDims& d = s.dims;
  std::ofstream out = open_out(path, true);
  char header[64] = {};
  std::memcpy(header, "EBMBED01", 8);
  const std::int64_t nx = d.nx, ny = d.ny, nz = d.nz;
  std::memcpy(header + 8, &nx, 8);
  std::memcpy(header + 16, &ny, 8);
  std::memcpy(header + 24, &nz, 8);
  std::memcpy(header + 32, &scales.dx_m, 8);
  std::memcpy(header + 40, &bed.achieved_phi, 8);
  const std::int32_t warn = bed.warning ? 1 : 0;
  const std::int32_t failures = bed.placement_failures;
  std::memcpy(header + 48, &warn, 4);
  std::memcpy(header + 52, &failures, 4);
  put_bytes(out, header, sizeof header);
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x)
        put(out, static_cast<std::uint8_t>(s.flag[d.idx(x, y, z)]));
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x) put(out, s.fill[d.idx(x, y, z)]);
  if (!out) io_fail(path, "write failed");
}

BedResult read_bed(SimState& s, const UnitScales& scales,
                   const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  char header[64];
  if (!in.read(header, sizeof header)) io_fail(path, "truncated header");
  if (std::memcmp(header, "EBMBED01", 8) != 0)
    io_fail(path, "bad magic (not a bed file)");
  std::int64_t nx, ny, nz;
  double dx, phi;
  std::int32_t warn, failures;
  std::memcpy(&nx, header + 8, 8);
  std::memcpy(&ny, header + 16, 8);
  std::memcpy(&nz, header + 24, 8);
  std::memcpy(&dx, header + 32, 8);
  std::memcpy(&phi, header + 40, 8);
  std::memcpy(&warn, header + 48, 4);
  std::memcpy(&failures, header + 52, 4);
  const GridDims& d = s.dims;
  if (nx != d.nx || ny != d.ny || nz != d.nz)
    io_fail(path, "bed dimensions do not match the configured domain");
  if (dx != scales.dx_m)
    io_fail(path, "bed cell size does not match the configured domain");
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x)
        s.flag[d.idx(x, y, z)] =
            static_cast<CellFlag>(get<std::uint8_t>(in, path));
  for (int z = 1; z <= d.nz; ++z)
    for (int y = 1; y <= d.ny; ++y)
      for (int x = 1; x <= d.nx; ++x)
        s.fill[d.idx(x, y, z)] = get<double>(in, path);
  BedResult bed;
  bed.achieved_phi = phi;
  bed.warning = warn != 0;
  bed.placement_failures = failures;
  return bed;
}

}  // namespace ebm
