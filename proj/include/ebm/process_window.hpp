#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/grid.hpp"
#include "ebm/kernels.hpp"

namespace ebm {

enum class Verdict { Porous, Good, Swelling, Diverged };

const char* verdict_name(Verdict v);

/// Two-threshold rule: porosity takes precedence over overheating — an
/// under-dense sample is porous regardless of its transient temperatures.
Verdict classify(double rel_density, double t_avg_k);

/// Evaluation box for the density audit, in interior cell coordinates
/// (inclusive). The vertical extent is resolved per column: from the first
/// layer above the substrate to that column's highest solid cell.
struct EvalBox {
  int x0 = 1, x1 = 0;
  int y0 = 1, y1 = 0;
  int z_substrate_top = 0;  ///< last substrate layer; counting starts above
};

/// Box covering the hatched footprint with the outermost half-line-offset
/// margins excluded (a single line keeps its own half-offset band).
EvalBox hatch_eval_box(const RunConfig& c);

/// Solid-occupied fraction of the evaluation box: sum of solid fill levels
/// over cells between the substrate top and each column's final solid
/// surface, divided by the cell count of that region. Internal gas counts as
/// porosity. Throws if no column in the box has solid above the substrate.
double relative_density(const SimState& s, const EvalBox& box);

/// Per-step outlier-trimmed surface-temperature statistics, grouped by hatch
/// line: each beam-on step contributes the given percentile (nearest-rank) of
/// the footprint temperatures; the summary value is the maximum over lines of
/// the per-line mean. Throws if no beam-on step recorded a temperature.
class SurfaceTempRecorder {
 public:
  explicit SurfaceTempRecorder(double percentile = 0.99);
  /// Records one beam-on step's footprint temperatures (ignored if empty).
  void record(int line, const std::vector<double>& temps_k);
  double averaged_peak_temperature() const;
  double raw_peak_temperature() const;
  bool empty() const;

 private:
  double percentile_;
  std::vector<std::vector<double>> per_line_;  ///< per-step percentile values
  double raw_peak_ = 0.0;
  bool any_ = false;
};

/// Nearest-rank percentile (p in (0,1]) of an unsorted sample.
double nearest_rank_percentile(std::vector<double> sample, double p);

struct PointResult {
  double v_scan_m_s = 0;
  double e_l_kj_m = 0;
  double power_w = 0;
  Verdict verdict = Verdict::Diverged;
  double rel_density = 0;
  double t_avg_k = 0;
  double t_peak_k = 0;
  std::int64_t steps = 0;
  double wall_s = 0;
  // Diagnostics (not part of the CSV schema).
  double melt_depth_m = 0;        ///< deepest ever-molten cell below substrate top
  double remelted_fraction = 0;   ///< substrate cells (eval box) that remelted
};

/// Shared powder bed: one packing reused across sweep points.
struct BedVolume {
  GridDims dims;
  std::vector<CellFlag> flag;  ///< padded layout
  std::vector<double> fill;
  BedResult info;
};

/// Generates (or rasterizes a loaded bed into) the shared volume.
BedVolume make_bed_volume(const RunConfig& c);

/// Runs one sweep point: hatches a single layer at (E_L, v_scan), cools
/// until everything is strictly below the melting point (bounded by
/// max_cooldown_s), then measures and classifies. `on_step`, if set, is
/// called after every step (snapshot cadence etc.).
PointResult run_point(
    const RunConfig& cfg, const BedVolume& bed, double e_l_kj_m,
    double v_scan_m_s, int threads,
    const std::function<void(const Simulation&, const StepReport&)>& on_step =
        {});

/// CSV schema (exact column order).
extern const char* const kCsvHeader;

std::string csv_row(const PointResult& r);

/// Runs the whole grid (v outer, E_L inner), writing rows in grid order to
/// csv_path. A provenance header (# -prefixed config echo) is written for
/// fresh files. With resume=true, rows whose (v, E_L) already appear in the
/// file are skipped. Diverged points produce DIVERGED rows and the sweep
/// continues. Points execute concurrently up to `workers`, each simulation
/// single-threaded; row order and content are deterministic.
std::vector<PointResult> run_sweep(const RunConfig& cfg,
                                   const std::string& csv_path, int workers,
                                   bool resume);

}  // namespace ebm
