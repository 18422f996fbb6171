#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "ebm/beam.hpp"
#include "ebm/config.hpp"

using namespace ebm;

namespace {

std::string err_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("the full-scenario preset carries the published scales exactly") {
  const RunConfig c = preset_config("fig5_scenario");
  CHECK(c.lattice.dx_m == 5e-6);
  CHECK(c.lattice.dt_s == 1.75e-7);
  CHECK(c.lattice.nx == 288);  // 1.44e-3 / 5e-6
  CHECK(c.lattice.ny == 128);  // 0.64e-3 / 5e-6
  CHECK(c.lattice.nz == 48);   // 0.24e-3 / 5e-6
  CHECK(c.scan.beam_offset_m == 13.56e-3);
  CHECK(c.scan.n_lines == 7);
  CHECK(c.scan.line_offset_m == 100e-6);
  CHECK(c.material.t_initial_k == 1000.0);
  CHECK(c.powder.layer_thickness_m == 50e-6);

  // Derived quantities line up with the scenario: the hatch is centered in y
  // and the beam settings give a mid-range line energy.
  CHECK(c.y_center_m() == doctest::Approx(3.2e-4).epsilon(1e-12));
  CHECK(line_energy(build_beam_params(c)) == doctest::Approx(150.0).epsilon(1e-12));
  const GridDims d = c.dims();
  CHECK(d.nx == 288);
  CHECK(d.ny == 128);
  CHECK(d.nz == 48);

  // The preset on its own is a valid configuration.
  CHECK(parse_config("preset = fig5_scenario\n") == c);
}

TEST_CASE("the desk preset is a single-line sweep on the reduced domain") {
  const RunConfig c = preset_config("fig5_desk");
  CHECK(c.lattice.nx == 128);
  CHECK(c.lattice.ny == 64);
  CHECK(c.lattice.nz == 48);
  CHECK(c.scan.n_lines == 1);
  CHECK(c.sweep.present);
  CHECK(c.sweep.v_scan_m_s.size() == 2);
  CHECK(c.sweep.line_energy_kj_m.size() == 3);
  // Energies ascend so the monotonicity audit reads the grid in order.
  for (std::size_t i = 1; i < c.sweep.line_energy_kj_m.size(); ++i)
    CHECK(c.sweep.line_energy_kj_m[i] > c.sweep.line_energy_kj_m[i - 1]);
  CHECK(parse_config("preset = fig5_desk\n") == c);

  CHECK_THROWS_AS(preset_config("fig5_deskk"), ConfigError);
}

TEST_CASE("serialization round-trips both presets exactly") {
  for (const char* name : {"fig5_scenario", "fig5_desk"}) {
    const RunConfig c = preset_config(name);
    CHECK(parse_config(to_ini(c)) == c);
  }

  // A mutated config (including a sweep section) round-trips too.
  RunConfig c = preset_config("fig5_scenario");
  c.lattice.tau_f = 0.8125;
  c.boundary.y_lo = FaceRule::Periodic;
  c.boundary.y_hi = FaceRule::Periodic;
  c.run.seed = 987654321;
  c.run.snapshot_every_steps = 250;
  c.run.out_dir = "elsewhere";
  c.scan.serpentine = false;
  c.sweep.present = true;
  c.sweep.v_scan_m_s = {0.8, 1.6, 3.2};
  c.sweep.line_energy_kj_m = {0.1, 0.5};
  CHECK(parse_config(to_ini(c)) == c);
}

TEST_CASE("an empty file reports every missing required key") {
  const std::string e = err_of("");
  CHECK(contains(e, "missing required keys"));
  CHECK(contains(e, "lattice.dx_m"));
  CHECK(contains(e, "lattice.tau_f"));
  CHECK(contains(e, "material.t_melt_k"));
  CHECK(contains(e, "beam.current_a"));
  CHECK(contains(e, "scan.x_end_m"));
  // Powder geometry is required while powder is enabled (the default).
  CHECK(contains(e, "powder.layer_thickness_m"));
}

TEST_CASE("a sub-critical relaxation time names the stability bound") {
  const std::string text =
      "preset = fig5_scenario\n"
      "[lattice]\n"
      "tau_f = 0.4\n";
  const std::string e = err_of(text);
  CHECK(contains(e, "line 3"));
  CHECK(contains(e, "tau_f"));
  CHECK(contains(e, "stability bound 0.5"));

  // tau_h obeys the same bound; exactly 0.5 is rejected as well.
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice]\ntau_h = 0.5\n"),
                 "stability bound 0.5"));
}

TEST_CASE("unknown keys and sections carry their line number") {
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice]\nbogus = 3\n"),
                 "line 3: unknown key 'bogus' in [lattice]"));
  CHECK(contains(err_of("preset = fig5_scenario\n\n\n[nope]\nx = 1\n"),
                 "line 5: unknown section [nope]"));
  CHECK(contains(err_of("x = 1\n"), "line 1"));
  CHECK(contains(err_of("x = 1\n"), "outside any section"));
}

TEST_CASE("malformed syntax is rejected with position and expectation") {
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice]\nnx = abc\n"),
                 "expected an integer"));
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice]\ndx_m = oops\n"),
                 "expected a number"));
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice\n"),
                 "unterminated section header"));
  CHECK(contains(err_of("preset = fig5_scenario\n[scan]\nserpentine = maybe\n"),
                 "expected true/false"));
  CHECK(contains(err_of("preset = fig5_scenario\n[boundary]\nz_hi = open\n"),
                 "expected wall|periodic|outflow"));
  CHECK(contains(err_of("preset = fig5_scenario\n[lattice]\nnx\n"),
                 "expected 'key = value'"));
  CHECK(contains(err_of("[lattice]\npreset = fig5_scenario\n"),
                 "unknown key 'preset'"));
}

TEST_CASE("a preset line must come before any section") {
  const std::string e =
      err_of("[lattice]\nnx = 16\n\npreset = fig5_scenario\n");
  // 'preset' inside a section is an unknown key; at top level after a
  // section it is an ordering error. Both must be rejected.
  const std::string e2 = err_of("[lattice]\nnx = 16\n[material]\n"
                                "t_melt_k = 1\n");
  CHECK(!e.empty());
  CHECK(!e2.empty());
  CHECK(contains(err_of("preset = nosuch\n"), "unknown preset 'nosuch'"));
}

TEST_CASE("overrides after a preset replace only the named keys") {
  const RunConfig base = preset_config("fig5_scenario");
  const RunConfig c = parse_config(
      "preset = fig5_scenario\n"
      "[lattice]\n"
      "nx = 64\n"
      "[run]\n"
      "seed = 42\n"
      "# a comment line\n"
      "threads = 4   ; trailing comment\n");
  CHECK(c.lattice.nx == 64);
  CHECK(c.run.seed == 42);
  CHECK(c.run.threads == 4);
  CHECK(c.lattice.ny == base.lattice.ny);
  CHECK(c.lattice.dx_m == base.lattice.dx_m);
  CHECK(c.material == base.material);
  CHECK(c.scan == base.scan);
}

TEST_CASE("semantic validation rejects inconsistent physics") {
  // Preheat at or above the melting point.
  CHECK(contains(err_of("preset = fig5_scenario\n[material]\n"
                        "t_initial_k = 2000\n"),
                 "preheat must lie below the melting point"));
  // Degenerate scan line.
  CHECK(contains(err_of("preset = fig5_scenario\n[scan]\nx_end_m = 0\n"),
                 "positive length"));
  // Layer that leaves no headspace.
  CHECK(contains(err_of("preset = fig5_scenario\n[powder]\n"
                        "layer_thickness_m = 0.2e-3\n"),
                 "headspace"));
  // Snapshot cadence below zero (zero itself means disabled).
  CHECK(contains(err_of("preset = fig5_scenario\n[run]\n"
                        "snapshot_every_steps = -1\n"),
                 "snapshot cadence must be >= 1 (0 = off)"));
  CHECK_NOTHROW(parse_config("preset = fig5_scenario\n[run]\n"
                             "snapshot_every_steps = 0\n"));
  // Cool-down cap below the minimum cool-down.
  CHECK(contains(err_of("preset = fig5_scenario\n[run]\n"
                        "cooldown_s = 2e-3\nmax_cooldown_s = 1e-3\n"),
                 "max_cooldown_s"));
  // Sweep entries must be positive and non-empty.
  CHECK(contains(err_of("preset = fig5_desk\n[sweep]\n"
                        "v_scan_m_s = 1.0, 0\n"),
                 "scan velocities must be > 0"));
  // Beam efficiency outside (0,1].
  CHECK(contains(err_of("preset = fig5_scenario\n[beam]\neta = 1.5\n"),
                 "must be in (0,1]"));
  // Percentile outside (0,1].
  CHECK(contains(err_of("preset = fig5_scenario\n[run]\n"
                        "t_avg_percentile = 0\n"),
                 "must be in (0,1]"));
}

TEST_CASE("loading reports the file path on both open and parse failures") {
  const std::string missing = "/no/such/dir/missing.cfg";
  try {
    load_config(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), missing));
  }

  namespace fs = std::filesystem;
  const std::string path =
      (fs::temp_directory_path() / "ebm_test_bad.cfg").string();
  {
    std::ofstream out(path);
    out << "preset = fig5_scenario\n[lattice]\ntau_f = 0.4\n";
  }
  try {
    load_config(path);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(contains(e.what(), path));
    CHECK(contains(e.what(), "stability bound"));
  }
  fs::remove(path);
}

TEST_CASE("physical settings translate into consistent lattice parameters") {
  const RunConfig c = preset_config("fig5_scenario");
  const SimParams p = build_sim_params(c);
  CHECK(p.tau_f == c.lattice.tau_f);
  CHECK(p.tau_h == c.lattice.tau_h);
  CHECK(p.material.t_initial_k == 1000.0);
  CHECK(p.material.e_solidus == c.material.t_melt_k);
  CHECK(p.material.e_liquidus ==
        c.material.t_melt_k + c.material.latent_heat_k);
  // Gravity points down and is scaled by dt^2/dx.
  CHECK(p.gravity_lat[2] ==
        doctest::Approx(-9.81 * 1.75e-7 * 1.75e-7 / 5e-6).epsilon(1e-12));
  CHECK(p.gravity_lat[0] == 0.0);
  // Energy conversion: one Joule spread over a cell of rho*cp*dx^3.
  CHECK(p.material.joule_to_energy ==
        doctest::Approx(1.0 / (4000.0 * 700.0 * 125e-18)).epsilon(1e-12));
  // Surface tension in lattice units: sigma * dt^2 / (rho * dx^3).
  CHECK(lattice_surface_tension(1.5, 4000.0, c.scales()) ==
        doctest::Approx(1.5 * 1.75e-7 * 1.75e-7 / (4000.0 * 125e-18))
            .epsilon(1e-12));

  const PowderSpec ps = build_powder_spec(c);
  CHECK(ps.layer_thickness_m == 50e-6);
  CHECK(ps.seed == c.run.seed);

  const ScanPath path = build_scan_path(c);
  CHECK(path.lines.size() == 7);
}
