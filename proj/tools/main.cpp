// Command-line driver: single runs, process-window sweeps, analytic
// benchmarks, and powder-bed generation.
//
// Exit codes: 0 success, 1 configuration/validation error, 2 numerical
// divergence, 3 benchmark failure.

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ebm/beam.hpp"
#include "ebm/bench.hpp"
#include "ebm/config.hpp"
#include "ebm/powder.hpp"
#include "ebm/process_window.hpp"
#include "ebm/snapshot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitBenchFail = 3;

struct Overrides {
  int threads = 0;           // 0 = keep config value
  std::int64_t seed = -1;    // <0 = keep config value
  std::string out_dir;       // empty = keep config value
};

void apply(const Overrides& o, ebm::RunConfig& cfg) {
  if (o.threads > 0) cfg.run.threads = o.threads;
  if (o.seed >= 0) cfg.run.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.out_dir.empty()) cfg.run.out_dir = o.out_dir;
}

ebm::RunConfig load(const std::string& path, const Overrides& o) {
  ebm::RunConfig cfg = ebm::load_config(path);
  apply(o, cfg);
  std::filesystem::create_directories(cfg.run.out_dir);
  return cfg;
}

void print_bed_audit(const ebm::BedResult& info) {
  std::printf("powder bed: %zu spheres, packing density %.4f",
              info.spheres.size(), info.achieved_phi);
  if (info.placement_failures > 0)
    std::printf(", %d placement failures", info.placement_failures);
  std::printf("%s\n", info.warning ? "  [WARNING: audit out of tolerance]"
                                   : "");
}

void print_point(const ebm::PointResult& r) {
  std::printf(
      "verdict=%s  rel_density=%.6f  t_avg=%.1f K  t_peak=%.1f K  "
      "steps=%" PRId64 "  wall=%.1f s\n",
      ebm::verdict_name(r.verdict), r.rel_density, r.t_avg_k, r.t_peak_k,
      r.steps, r.wall_s);
  if (r.melt_depth_m > 0)
    std::printf("melt depth below substrate top: %.1f um, remelted substrate "
                "fraction: %.3f\n",
                1e6 * r.melt_depth_m, r.remelted_fraction);
}

int cmd_run(const std::string& path, const Overrides& o) {
  ebm::RunConfig cfg = load(path, o);
  const ebm::SimParams sim_params = ebm::build_sim_params(cfg);
  ebm::BedVolume bed = ebm::make_bed_volume(cfg);
  print_bed_audit(bed.info);

  const ebm::BeamParams beam = ebm::build_beam_params(cfg);
  const double e_l_kj_m = ebm::line_energy(beam) / 1e3;
  std::printf("beam: %.0f W at %.2f m/s  [line energy %.3f kJ/m]\n",
              beam.power_w(), beam.v_scan_m_s, e_l_kj_m);

  const int cadence = cfg.run.snapshot_every_steps;
  const std::string dir = cfg.run.out_dir;
  auto on_step = [&](const ebm::Simulation& sim, const ebm::StepReport& rep) {
    if (cadence <= 0 || rep.step % cadence != 0) return;
    char stem[64];
    std::snprintf(stem, sizeof stem, "/snapshot_%08" PRId64, rep.step);
    ebm::write_vtk(sim.state(), sim_params.material, cfg.scales(), rep.step,
                   dir + stem + ".vtk");
    ebm::write_sidecar(sim.state(), sim_params.material, cfg.scales(),
                       rep.step, dir + stem + ".bin");
  };

  const ebm::PointResult r =
      ebm::run_point(cfg, bed, e_l_kj_m, cfg.beam.v_scan_m_s, cfg.run.threads,
                     on_step);
  print_point(r);

  // Single-run metrics in the sweep CSV schema, with the config echoed as a
  // provenance header.
  const std::string metrics = dir + "/metrics.csv";
  {
    std::ofstream out(metrics, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + metrics);
    std::istringstream echo(ebm::to_ini(cfg));
    for (std::string ln; std::getline(echo, ln);) out << "# " << ln << '\n';
    out << ebm::kCsvHeader << '\n' << ebm::csv_row(r) << '\n';
  }
  std::printf("metrics written to %s\n", metrics.c_str());
  return r.verdict == ebm::Verdict::Diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const std::string& path, bool resume, const Overrides& o) {
  ebm::RunConfig cfg = load(path, o);
  if (!cfg.sweep.present)
    throw ebm::ConfigError("config has no [sweep] section");
  const std::string csv = cfg.run.out_dir + "/process_window.csv";
  const std::vector<ebm::PointResult> rows =
      ebm::run_sweep(cfg, csv, cfg.run.threads, resume);
  bool diverged = false;
  for (const ebm::PointResult& r : rows) {
    std::printf("v=%.3f m/s  E_L=%.3f kJ/m  -> %s\n", r.v_scan_m_s,
                r.e_l_kj_m, ebm::verdict_name(r.verdict));
    diverged = diverged || r.verdict == ebm::Verdict::Diverged;
  }
  std::printf("process window written to %s\n", csv.c_str());
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_bed(const std::string& path, const Overrides& o) {
  ebm::RunConfig cfg = load(path, o);
  ebm::SimState state;
  state.allocate(cfg.dims());
  const ebm::PowderSpec spec = ebm::build_powder_spec(cfg);
  ebm::BedResult bed = ebm::generate_bed(spec, cfg.scales(), cfg.dims());
  ebm::rasterize_bed(state, bed, spec, cfg.scales());
  print_bed_audit(bed);
  const std::string out = cfg.run.out_dir + "/bed.bin";
  ebm::write_bed(state, bed, cfg.scales(), out);
  std::printf("bed written to %s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Coupled thermal free-surface lattice Boltzmann simulator for "
      "electron-beam melting of a metal powder layer"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--threads", o.threads, "Worker threads (overrides config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "RNG seed (overrides config)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--out", o.out_dir, "Output directory (overrides config)");

  std::string cfg_path, bench_name;
  bool resume = false;

  CLI::App* run = app.add_subcommand("run", "Run a single simulation");
  run->add_option("config", cfg_path, "Config file")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep", "Map the process window over a sweep grid");
  sweep->add_option("config", cfg_path, "Config file with a [sweep] section")
      ->required();
  sweep->add_flag("--resume", resume, "Skip rows already present in the CSV");

  CLI::App* bench = app.add_subcommand(
      "bench", "Run an analytic benchmark (stefan | poiseuille | "
               "thermal-decay | laplace)");
  bench->add_option("name", bench_name, "Benchmark name")->required();

  CLI::App* bed =
      app.add_subcommand("bed", "Generate and save a powder bed only");
  bed->add_option("config", cfg_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(cfg_path, o);
    if (*sweep) return cmd_sweep(cfg_path, resume, o);
    if (*bench) return ebm::run_bench(bench_name) ? kExitOk : kExitBenchFail;
    if (*bed) return cmd_bed(cfg_path, o);
  } catch (const ebm::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
