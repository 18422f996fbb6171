#include "ebm/process_window.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ebm/powder.hpp"

namespace ebm {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Porous: return "POROUS";
    case Verdict::Good: return "GOOD";
    case Verdict::Swelling: return "SWELLING";
    default: return "DIVERGED";
  }
}

Verdict classify(double rel_density, double t_avg_k) {
  if (rel_density < 0.995) return Verdict::Porous;
  if (t_avg_k > 7500.0) return Verdict::Swelling;
  return Verdict::Good;
}

EvalBox hatch_eval_box(const RunConfig& c) {
  const double dx = c.lattice.dx_m;
  EvalBox box;
  // Cells whose center lies inside the scanned x interval.
  box.x0 = std::max(1, static_cast<int>(std::ceil(c.scan.x_start_m / dx + 0.5)));
  box.x1 = std::min(c.lattice.nx,
                    static_cast<int>(std::floor(c.scan.x_end_m / dx + 0.5)));
  const int n = c.scan.n_lines;
  const double yc = c.y_center_m();
  const double off = c.scan.line_offset_m;
  const double y_first = yc - 0.5 * (n - 1) * off;
  const double y_last = yc + 0.5 * (n - 1) * off;
  double y_lo, y_hi;
  if (n >= 2) {  // trim the outermost half-offset margins
    y_lo = y_first + 0.5 * off;
    y_hi = y_last - 0.5 * off;
  } else {  // single line: its own half-offset band
    y_lo = y_first - 0.5 * off;
    y_hi = y_last + 0.5 * off;
  }
  box.y0 = std::max(1, static_cast<int>(std::ceil(y_lo / dx + 0.5)));
  box.y1 = std::min(c.lattice.ny,
                    static_cast<int>(std::floor(y_hi / dx + 0.5)));
  box.z_substrate_top =
      static_cast<int>(std::lround(c.powder.substrate_height_m / dx));
  return box;
}

double relative_density(const SimState& s, const EvalBox& box) {
  const GridDims& d = s.dims;
  if (box.x1 < box.x0 || box.y1 < box.y0)
    throw std::runtime_error("density evaluation box is empty");
  double occupied = 0.0;
  std::int64_t cells = 0;
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x) {
      int top = 0;
      for (int z = d.nz; z > box.z_substrate_top; --z)
        if (s.flag[d.idx(x, y, z)] == CellFlag::Solid) {
          top = z;
          break;
        }
      for (int z = box.z_substrate_top + 1; z <= top; ++z) {
        ++cells;
        const std::size_t c = d.idx(x, y, z);
        if (s.flag[c] == CellFlag::Solid) occupied += s.fill[c];
      }
    }
  if (cells == 0)
    throw std::runtime_error(
        "density evaluation box holds no solid above the substrate");
  return occupied / static_cast<double>(cells);
}

double nearest_rank_percentile(std::vector<double> sample, double p) {
  if (sample.empty())
    throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 1.0))
    throw std::invalid_argument("percentile must be in (0,1]");
  std::sort(sample.begin(), sample.end());
  const std::size_t rank = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(p * static_cast<double>(sample.size()))));
  return sample[std::min(rank, sample.size()) - 1];
}

SurfaceTempRecorder::SurfaceTempRecorder(double percentile)
    : percentile_(percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0))
    throw std::invalid_argument("percentile must be in (0,1]");
}

void SurfaceTempRecorder::record(int line, const std::vector<double>& temps_k) {
  if (temps_k.empty() || line < 0) return;
  if (static_cast<int>(per_line_.size()) <= line) per_line_.resize(line + 1);
  per_line_[line].push_back(nearest_rank_percentile(temps_k, percentile_));
  raw_peak_ = std::max(raw_peak_, *std::max_element(temps_k.begin(),
                                                    temps_k.end()));
  any_ = true;
}

bool SurfaceTempRecorder::empty() const { return !any_; }

double SurfaceTempRecorder::raw_peak_temperature() const { return raw_peak_; }

double SurfaceTempRecorder::averaged_peak_temperature() const {
  if (!any_)
    throw std::runtime_error("no beam-on surface temperatures recorded");
  double best = 0.0;
  for (const auto& line : per_line_) {
    if (line.empty()) continue;
    double sum = 0.0;
    for (double v : line) sum += v;
    best = std::max(best, sum / static_cast<double>(line.size()));
  }
  return best;
}

BedVolume make_bed_volume(const RunConfig& c) {
  BedVolume v;
  v.dims = c.dims();
  SimState tmp;
  tmp.allocate(v.dims);
  PowderSpec spec = build_powder_spec(c);
  if (c.powder.enabled) {
    BedResult bed = generate_bed(spec, c.scales(), v.dims);
    rasterize_bed(tmp, bed, spec, c.scales());
    v.info = std::move(bed);
  } else {
    BedResult none;
    rasterize_bed(tmp, none, spec, c.scales());
    v.info = std::move(none);
  }
  v.flag = tmp.flag;
  v.fill = tmp.fill;
  return v;
}

PointResult run_point(
    const RunConfig& cfg, const BedVolume& bed, double e_l_kj_m,
    double v_scan_m_s, int threads,
    const std::function<void(const Simulation&, const StepReport&)>& on_step) {
  const auto t0 = std::chrono::steady_clock::now();
  PointResult out;
  out.v_scan_m_s = v_scan_m_s;
  out.e_l_kj_m = e_l_kj_m;
  out.power_w = e_l_kj_m * 1e3 * v_scan_m_s;

  RunConfig c = cfg;
  c.beam.v_scan_m_s = v_scan_m_s;
  c.beam.current_a = out.power_w / c.beam.voltage_v;

  const SimParams params = build_sim_params(c);
  Simulation sim(params, c.dims(), threads);
  if (bed.flag.size() != sim.state().flag.size())
    throw std::invalid_argument("bed volume does not match the domain");
  sim.state().flag = bed.flag;
  sim.state().fill = bed.fill;
  sim.finalize_scene();
  if (c.run.substrate_sink)
    sim.pin_energy_layer(1, params.material.initial_energy());
  sim.attach_beam(build_beam_params(c), build_scan_path(c));

  SurfaceTempRecorder recorder(c.run.t_avg_percentile);
  bool diverged = false;

  while (!sim.beam_done()) {
    const StepReport rep = sim.step();
    if (rep.beam.state == BeamSample::State::OnDomain)
      recorder.record(rep.beam.line, sim.footprint_temperatures());
    if (on_step) on_step(sim, rep);
    if (sim.aborted()) {
      diverged = true;
      break;
    }
  }
  if (!diverged) {
    const double dt = c.lattice.dt_s;
    const std::int64_t min_cool =
        static_cast<std::int64_t>(std::ceil(c.run.cooldown_s / dt));
    const std::int64_t max_cool =
        static_cast<std::int64_t>(std::ceil(c.run.max_cooldown_s / dt));
    std::int64_t cool = 0;
    while (cool < max_cool) {
      if (cool >= min_cool &&
          sim.last_report().max_temperature_k < c.material.t_melt_k)
        break;
      const StepReport rep = sim.step();
      ++cool;
      if (on_step) on_step(sim, rep);
      if (sim.aborted()) {
        diverged = true;
        break;
      }
    }
  }

  out.steps = sim.step_count();
  out.t_avg_k = recorder.empty() ? std::nan("")
                                 : recorder.averaged_peak_temperature();
  out.t_peak_k = recorder.empty() ? std::nan("")
                                  : recorder.raw_peak_temperature();
  if (diverged) {
    out.verdict = Verdict::Diverged;
    out.rel_density = std::nan("");
  } else {
    const EvalBox box = hatch_eval_box(c);
    out.rel_density = relative_density(sim.state(), box);
    out.verdict = classify(out.rel_density, out.t_avg_k);

    // Diagnostics: reach of the melt below the original substrate surface.
    const GridDims& d = sim.state().dims;
    const SimState& s = sim.state();
    int min_z = d.nz + 1;
    for (int z = 1; z <= d.nz; ++z) {
      bool any = false;
      for (int y = 1; y <= d.ny && !any; ++y)
        for (int x = 1; x <= d.nx; ++x)
          if (s.ever_fluid[d.idx(x, y, z)]) {
            any = true;
            break;
          }
      if (any) {
        min_z = z;
        break;
      }
    }
    if (min_z <= box.z_substrate_top)
      out.melt_depth_m =
          (box.z_substrate_top - min_z + 1) * c.lattice.dx_m;
    std::int64_t sub_cells = 0, sub_remelted = 0;
    for (int z = 1; z <= box.z_substrate_top; ++z)
      for (int y = box.y0; y <= box.y1; ++y)
        for (int x = box.x0; x <= box.x1; ++x) {
          ++sub_cells;
          if (s.ever_fluid[d.idx(x, y, z)]) ++sub_remelted;
        }
    out.remelted_fraction =
        sub_cells > 0
            ? static_cast<double>(sub_remelted) / static_cast<double>(sub_cells)
            : 0.0;
  }
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
                   .count();
  return out;
}

const char* const kCsvHeader =
    "v_scan_m_s,E_L_kJ_m,P_W,verdict,rel_density,T_avg_K,T_peak_K,steps,"
    "wall_s";

std::string csv_row(const PointResult& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_s);
  std::string s;
  s += fmt_num(r.v_scan_m_s);
  s += ",";
  s += fmt_num(r.e_l_kj_m);
  s += ",";
  s += fmt_num(r.power_w);
  s += ",";
  s += verdict_name(r.verdict);
  s += ",";
  s += fmt_num(r.rel_density);
  s += ",";
  s += fmt_num(r.t_avg_k);
  s += ",";
  s += fmt_num(r.t_peak_k);
  s += ",";
  s += std::to_string(r.steps);
  s += ",";
  s += wall;
  return s;
}

std::vector<PointResult> run_sweep(const RunConfig& cfg,
                                   const std::string& csv_path, int workers,
                                   bool resume) {
  struct Pair {
    double v, e;
  };
  std::vector<Pair> grid;
  for (double v : cfg.sweep.v_scan_m_s)
    for (double e : cfg.sweep.line_energy_kj_m) grid.push_back({v, e});

  // Rows already present (resume): keyed by the formatted (v, E_L) pair.
  std::set<std::string> done;
  bool file_exists = false;
  if (resume) {
    std::ifstream in(csv_path);
    if (in) {
      file_exists = true;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("v_scan_m_s", 0) == 0) continue;
        const auto c1 = line.find(',');
        if (c1 == std::string::npos) continue;
        const auto c2 = line.find(',', c1 + 1);
        if (c2 == std::string::npos) continue;
        done.insert(line.substr(0, c2));
      }
    }
  }

  std::vector<int> pending;  // indices into grid, in row order
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
    const std::string key = fmt_num(grid[i].v) + "," + fmt_num(grid[i].e);
    if (!done.count(key)) pending.push_back(i);
  }

  std::ofstream out(csv_path, file_exists ? std::ios::app : std::ios::out);
  if (!out) throw std::runtime_error(csv_path + ": cannot open for writing");
  if (!file_exists) {
    // Provenance: the full effective configuration rides along as comments.
    std::istringstream ini(to_ini(cfg));
    std::string line;
    while (std::getline(ini, line)) out << "# " << line << "\n";
    out << kCsvHeader << "\n";
    out.flush();
  }
  if (pending.empty()) return {};

  const BedVolume bed = make_bed_volume(cfg);

  const int n = static_cast<int>(pending.size());
  const int w = std::max(1, std::min(workers, n));
  const int inner_threads = std::max(1, workers / w);

  std::vector<PointResult> results(n);
  std::vector<char> ready(n, 0);
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> next{0};

  const auto work = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      PointResult r = run_point(cfg, bed, grid[pending[i]].e,
                                grid[pending[i]].v, inner_threads);
      {
        std::lock_guard<std::mutex> lock(mu);
        results[i] = std::move(r);
        ready[i] = 1;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> threads;
  for (int i = 0; i < w; ++i) threads.emplace_back(work);

  // Flush rows strictly in grid order as they complete.
  for (int i = 0; i < n; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return ready[i] != 0; });
    out << csv_row(results[i]) << "\n";
    out.flush();
  }
  for (auto& t : threads) t.join();
  if (!out) throw std::runtime_error(csv_path + ": write failed");
  return results;
}

}  // namespace ebm
