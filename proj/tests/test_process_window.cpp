#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/grid.hpp"
#include "ebm/powder.hpp"
#include "ebm/process_window.hpp"
#include "ebm/rng.hpp"

using namespace ebm;

namespace {

/// Independent restatement of the two-threshold rule, for the property test.
Verdict classify_oracle(double rel, double t_avg) {
  const bool porous = rel < 0.995;
  const bool hot = t_avg > 7500.0;
  if (porous) return Verdict::Porous;  // porosity takes precedence
  return hot ? Verdict::Swelling : Verdict::Good;
}

void fill_solid_box(SimState& s, int x0, int x1, int y0, int y1, int z0,
                    int z1, CellFlag flag, double fill) {
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const std::size_t c = s.dims.idx(x, y, z);
        s.flag[c] = flag;
        s.fill[c] = fill;
      }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("classification follows the two-threshold rule") {
  CHECK(classify(0.994, 3000.0) == Verdict::Porous);
  CHECK(classify(0.999, 7600.0) == Verdict::Swelling);
  CHECK(classify(0.998, 3000.0) == Verdict::Good);

  // Boundary semantics: "higher than" is strict on both thresholds.
  CHECK(classify(0.995, 7500.0) == Verdict::Good);
  CHECK(classify(0.9949999, 3000.0) == Verdict::Porous);
  CHECK(classify(1.0, 7500.0000001) == Verdict::Swelling);

  // Porosity precedence: an under-dense sample is porous no matter how hot.
  CHECK(classify(0.10, 50000.0) == Verdict::Porous);

  CHECK(std::string(verdict_name(Verdict::Porous)) == "POROUS");
  CHECK(std::string(verdict_name(Verdict::Good)) == "GOOD");
  CHECK(std::string(verdict_name(Verdict::Swelling)) == "SWELLING");
  CHECK(std::string(verdict_name(Verdict::Diverged)) == "DIVERGED");
}

TEST_CASE("classification agrees with a brute-force oracle everywhere") {
  Rng rng(4242);
  for (int i = 0; i < 5000; ++i) {
    // Mix of uniform draws and threshold-hugging values.
    double rel = rng.uniform();
    double t = rng.uniform() * 12000.0;
    if (i % 3 == 0) rel = 0.995 + (rng.uniform() - 0.5) * 1e-6;
    if (i % 4 == 0) t = 7500.0 + (rng.uniform() - 0.5) * 1e-3;
    REQUIRE(classify(rel, t) == classify_oracle(rel, t));
  }
}

TEST_CASE("nearest-rank percentile picks the ceiling rank of the sorted "
          "sample") {
  const std::vector<double> ten{7, 2, 9, 4, 1, 10, 3, 8, 5, 6};
  CHECK(nearest_rank_percentile(ten, 0.5) == 5.0);    // ceil(5) -> 5th
  CHECK(nearest_rank_percentile(ten, 0.99) == 10.0);  // ceil(9.9) -> 10th
  CHECK(nearest_rank_percentile(ten, 1.0) == 10.0);
  CHECK(nearest_rank_percentile(ten, 0.05) == 1.0);  // ceil(0.5) -> 1st

  // With 200 samples the 99th percentile sits below the top two entries.
  std::vector<double> big(200, 3000.0);
  big[17] = 1e6;
  big[112] = 2e6;
  CHECK(nearest_rank_percentile(big, 0.99) == 3000.0);

  CHECK(nearest_rank_percentile({42.0}, 0.99) == 42.0);
  CHECK_THROWS_AS(nearest_rank_percentile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(nearest_rank_percentile({1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nearest_rank_percentile({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("a constant surface temperature averages to exactly itself") {
  SurfaceTempRecorder rec(0.99);
  CHECK(rec.empty());
  CHECK_THROWS_AS(rec.averaged_peak_temperature(), std::runtime_error);

  const std::vector<double> footprint(120, 3000.0);
  for (int line = 0; line < 3; ++line)
    for (int step = 0; step < 40; ++step) rec.record(line, footprint);

  CHECK(!rec.empty());
  CHECK(rec.averaged_peak_temperature() == 3000.0);
  CHECK(rec.raw_peak_temperature() == 3000.0);
}

TEST_CASE("a single-cell spike is rejected by the per-step percentile") {
  SurfaceTempRecorder rec(0.99);
  std::vector<double> footprint(200, 3000.0);
  for (int step = 0; step < 50; ++step) {
    if (step == 25) {
      std::vector<double> spiked = footprint;
      spiked[60] = 1e6;  // one cell, one step
      rec.record(0, spiked);
    } else {
      rec.record(0, footprint);
    }
  }
  // Rejection is total here (the spike never reaches the 99th rank), which
  // is comfortably inside the required one-percent band.
  CHECK(rec.averaged_peak_temperature() == doctest::Approx(3000.0).epsilon(0.01));
  CHECK(rec.averaged_peak_temperature() == 3000.0);
  // The raw (untrimmed) peak still remembers the spike.
  CHECK(rec.raw_peak_temperature() == 1e6);
}

TEST_CASE("linearly ramping line maxima average to the midpoint") {
  SurfaceTempRecorder rec(0.99);
  const int n = 81;
  for (int k = 0; k < n; ++k) {
    const double t = 5000.0 + 4000.0 * k / (n - 1);
    rec.record(0, {t});
  }
  CHECK(rec.averaged_peak_temperature() == doctest::Approx(7000.0).epsilon(1e-12));
}

TEST_CASE("the summary is the maximum over per-line means") {
  SurfaceTempRecorder rec(0.99);
  for (int step = 0; step < 10; ++step) rec.record(0, {3000.0});
  for (int step = 0; step < 10; ++step) rec.record(2, {4000.0});  // line 1 empty
  rec.record(1, {});   // empty footprints are ignored
  rec.record(-1, {5000.0});  // off-domain marker is ignored
  CHECK(rec.averaged_peak_temperature() == 4000.0);
  CHECK(rec.raw_peak_temperature() == 4000.0);

  CHECK_THROWS_AS(SurfaceTempRecorder(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SurfaceTempRecorder(1.5), std::invalid_argument);
}

TEST_CASE("relative density of a fully dense slab is one") {
  SimState s;
  s.allocate({40, 40, 26});
  fill_solid_box(s, 1, 40, 1, 40, 1, 24, CellFlag::Solid, 1.0);

  EvalBox box;
  box.x0 = 1;
  box.x1 = 40;
  box.y0 = 1;
  box.y1 = 40;
  box.z_substrate_top = 4;
  CHECK(relative_density(s, box) == 1.0);
}

TEST_CASE("an internal void subtracts exactly its cell count") {
  SimState s;
  s.allocate({40, 40, 26});
  fill_solid_box(s, 1, 40, 1, 40, 1, 24, CellFlag::Solid, 1.0);
  // One 4x4x4 gas void strictly inside the 40x40x20 evaluation region.
  fill_solid_box(s, 10, 13, 10, 13, 10, 13, CellFlag::Gas, 0.0);

  EvalBox box;
  box.x0 = 1;
  box.x1 = 40;
  box.y0 = 1;
  box.y1 = 40;
  box.z_substrate_top = 4;
  CHECK(relative_density(s, box) == 31936.0 / 32000.0);  // 1 - 64/32000
  CHECK(relative_density(s, box) == doctest::Approx(0.998).epsilon(1e-12));
}

TEST_CASE("fractional solid fills count fractionally") {
  SimState s;
  s.allocate({40, 40, 26});
  fill_solid_box(s, 1, 40, 1, 40, 1, 24, CellFlag::Solid, 1.0);
  s.fill[s.dims.idx(20, 20, 12)] = 0.5;  // a partially frozen cell

  EvalBox box;
  box.x0 = 1;
  box.x1 = 40;
  box.y0 = 1;
  box.y1 = 40;
  box.z_substrate_top = 4;
  CHECK(relative_density(s, box) == 31999.5 / 32000.0);
}

TEST_CASE("each column is measured up to its own solid top") {
  SimState s;
  s.allocate({2, 1, 30});
  fill_solid_box(s, 1, 1, 1, 1, 5, 24, CellFlag::Solid, 1.0);  // tall column
  fill_solid_box(s, 2, 2, 1, 1, 5, 14, CellFlag::Solid, 1.0);  // short column
  s.flag[s.dims.idx(2, 1, 10)] = CellFlag::Gas;  // a pore inside the short one
  s.fill[s.dims.idx(2, 1, 10)] = 0.0;

  EvalBox box;
  box.x0 = 1;
  box.x1 = 2;
  box.y0 = 1;
  box.y1 = 1;
  box.z_substrate_top = 4;
  // 20 + 10 cells measured, 20 + 9 occupied.
  CHECK(relative_density(s, box) == 29.0 / 30.0);
}

TEST_CASE("empty evaluation regions are rejected") {
  SimState s;
  s.allocate({8, 8, 8});

  EvalBox inverted;
  inverted.x0 = 5;
  inverted.x1 = 2;
  inverted.y0 = 1;
  inverted.y1 = 8;
  CHECK_THROWS_AS(relative_density(s, inverted), std::runtime_error);

  EvalBox empty;  // valid extents but nothing solid above the substrate
  empty.x0 = 1;
  empty.x1 = 8;
  empty.y0 = 1;
  empty.y1 = 8;
  empty.z_substrate_top = 2;
  CHECK_THROWS_AS(relative_density(s, empty), std::runtime_error);
}

TEST_CASE("an unmelted loose bed measures near its packing fraction") {
  PowderSpec spec;
  spec.layer_thickness_m = 50e-6;
  spec.substrate_height_m = 40e-6;
  spec.mu_d_m = 60e-6;
  spec.lambda_d_m = 180e-6;
  spec.d_min_m = 30e-6;
  spec.d_max_m = 100e-6;
  spec.phi_target = 0.5;
  spec.seed = 7;
  const UnitScales scales{5e-6, 1.75e-7};
  const GridDims dims{64, 64, 32};

  BedResult bed = generate_bed(spec, scales, dims);
  SimState s;
  s.allocate(dims);
  rasterize_bed(s, bed, spec, scales);

  EvalBox box;
  box.x0 = 1;
  box.x1 = 64;
  box.y0 = 1;
  box.y1 = 64;
  box.z_substrate_top = 8;  // 40e-6 / 5e-6
  const double rel = relative_density(s, box);
  INFO("rel density = ", rel, " audited phi = ", bed.achieved_phi);
  CHECK(rel == doctest::Approx(bed.achieved_phi).epsilon(0.3));
  CHECK(rel > 0.25);
  CHECK(rel < 0.8);
}

TEST_CASE("the hatch evaluation box trims the outermost half-offset margins") {
  RunConfig c;
  c.lattice.dx_m = 1e-5;
  c.lattice.nx = 100;
  c.lattice.ny = 100;
  c.lattice.nz = 30;
  c.scan.x_start_m = 2e-4;
  c.scan.x_end_m = 8e-4;
  c.scan.n_lines = 7;
  c.scan.line_offset_m = 1e-4;
  c.scan.y_center_m = -1;  // domain center: 5e-4
  c.powder.substrate_height_m = 8e-5;

  const EvalBox box = hatch_eval_box(c);
  // Cells whose centers lie inside the scanned x interval [2e-4, 8e-4].
  CHECK(box.x0 == 21);
  CHECK(box.x1 == 80);
  // Lines at y = 2e-4 .. 8e-4; trimmed band [2.5e-4, 7.5e-4].
  CHECK(box.y0 == 26);
  CHECK(box.y1 == 75);
  CHECK(box.z_substrate_top == 8);

  // A single line keeps its own half-offset band, [4.5e-4, 5.5e-4].
  c.scan.n_lines = 1;
  const EvalBox one = hatch_eval_box(c);
  CHECK(one.y0 == 46);
  CHECK(one.y1 == 55);
  CHECK(one.x0 == 21);
  CHECK(one.x1 == 80);
}

TEST_CASE("csv rows follow the documented schema") {
  CHECK(std::string(kCsvHeader) ==
        "v_scan_m_s,E_L_kJ_m,P_W,verdict,rel_density,T_avg_K,T_peak_K,steps,"
        "wall_s");

  PointResult r;
  r.v_scan_m_s = 1.5;
  r.e_l_kj_m = 0.3;
  r.power_w = 450.0;
  r.verdict = Verdict::Good;
  r.rel_density = 0.9975;
  r.t_avg_k = 3456.5;
  r.t_peak_k = 4000.0;
  r.steps = 1234;
  r.wall_s = 1.5;
  CHECK(csv_row(r) == "1.5,0.3,450,GOOD,0.9975,3456.5,4000,1234,1.500");

  r.verdict = Verdict::Diverged;
  const std::string row = csv_row(r);
  CHECK(row.find(",DIVERGED,") != std::string::npos);
  // Always exactly eight separators (nine columns).
  int commas = 0;
  for (char ch : row) commas += ch == ',';
  CHECK(commas == 8);
}

TEST_CASE("an empty sweep grid writes only provenance and the header") {
  const std::string path = temp_path("ebm_test_sweep_empty.csv");
  std::filesystem::remove(path);

  RunConfig cfg;  // grid left empty
  const std::vector<PointResult> rows = run_sweep(cfg, path, 1, false);
  CHECK(rows.empty());

  std::ifstream in(path);
  REQUIRE(bool(in));
  std::string line;
  bool saw_header = false;
  int data_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == kCsvHeader) {
      saw_header = true;
      continue;
    }
    ++data_rows;
  }
  CHECK(saw_header);
  CHECK(data_rows == 0);
  std::filesystem::remove(path);
}

TEST_CASE("resume skips rows that already appear in the table") {
  const std::string path = temp_path("ebm_test_sweep_resume.csv");
  std::filesystem::remove(path);

  RunConfig cfg;
  cfg.sweep.present = true;
  cfg.sweep.v_scan_m_s = {2.0};
  cfg.sweep.line_energy_kj_m = {0.25, 0.5};

  {
    std::ofstream out(path);
    out << "# provenance\n";
    out << kCsvHeader << "\n";
    out << "2,0.25,500,GOOD,0.998,3000,3200,10,0.001\n";
    out << "2,0.5,1000,SWELLING,0.999,7800,9100,10,0.001\n";
  }
  const std::string before = read_file(path);

  // Every grid point is already present: nothing runs, nothing is appended.
  const std::vector<PointResult> rows = run_sweep(cfg, path, 1, true);
  CHECK(rows.empty());
  CHECK(read_file(path) == before);
  std::filesystem::remove(path);
}

TEST_CASE("a miniature sweep point runs to a verdict") {
  RunConfig c;
  c.lattice.dx_m = 5e-6;
  c.lattice.dt_s = 5e-7;
  c.lattice.nx = 32;
  c.lattice.ny = 24;
  c.lattice.nz = 20;
  c.lattice.tau_f = 0.6;
  c.lattice.tau_h = 1.0;
  c.material.t_melt_k = 1900.0;
  c.material.latent_heat_k = 200.0;
  c.material.t_initial_k = 1000.0;
  c.material.rho_kg_m3 = 4000.0;
  c.material.cp_j_kg_k = 600.0;
  c.material.sigma_n_m = 0.02;
  c.beam.voltage_v = 60e3;
  c.beam.sigma_m = 15e-6;
  c.beam.eta = 0.9;
  c.scan.n_lines = 1;
  c.scan.line_offset_m = 1e-4;
  c.scan.x_start_m = 40e-6;
  c.scan.x_end_m = 120e-6;
  c.scan.beam_offset_m = 1e-4;
  c.powder.enabled = true;
  c.powder.layer_thickness_m = 40e-6;
  c.powder.substrate_height_m = 30e-6;
  c.powder.mu_d_m = 30e-6;
  c.powder.lambda_d_m = 90e-6;
  c.powder.d_min_m = 20e-6;
  c.powder.d_max_m = 40e-6;
  c.powder.phi = 0.5;
  c.run.cooldown_s = 5e-5;
  c.run.max_cooldown_s = 2.5e-4;

  const BedVolume bed = make_bed_volume(c);
  CHECK(bed.info.achieved_phi > 0.3);

  int callbacks = 0;
  const PointResult r = run_point(
      c, bed, 0.01, 1.0, 1,
      [&](const Simulation&, const StepReport&) { ++callbacks; });

  CHECK(r.verdict != Verdict::Diverged);
  CHECK(r.v_scan_m_s == 1.0);
  CHECK(r.e_l_kj_m == 0.01);
  CHECK(r.power_w == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(r.steps > 0);
  CHECK(callbacks == r.steps);
  CHECK(r.rel_density > 0.0);
  CHECK(r.rel_density <= 1.0 + 1e-9);
  CHECK(std::isfinite(r.t_avg_k));
  CHECK(r.t_avg_k > 900.0);           // at least the preheat level
  CHECK(r.t_peak_k >= r.t_avg_k - 1e-9);
  CHECK(r.wall_s > 0.0);
  // Scan portion (80 um at 1 m/s) plus at least the minimum cool-down.
  const std::int64_t scan_steps = std::int64_t(std::ceil(80e-6 / 1.0 / 5e-7));
  const std::int64_t min_cool = std::int64_t(std::ceil(5e-5 / 5e-7));
  CHECK(r.steps >= scan_steps + min_cool);
}
