#pragma once

#include <string>
#include <vector>

namespace ebm {

/// One analytic-validation case: a measured quantity against its closed-form
/// (or numerically solved transcendental) reference.
struct BenchResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Solves lambda * exp(lambda^2) * erf(lambda) = St / sqrt(pi) by bisection:
/// the growth coefficient of the one-phase melting similarity solution
/// (front at 2*lambda*sqrt(alpha*t)).
double stefan_growth_coefficient(double stefan_number);

/// Kinematic viscosity from the decay of a periodic shear wave on a 32^3
/// box, against nu = cs^2*(tau_f - 1/2).
BenchResult bench_shear_wave(double tau_f);

/// Thermal diffusivity from the decay of a sinusoidal temperature profile,
/// against k = cs^2*(tau_h - 1/2).
BenchResult bench_thermal_decay(double tau_h);

/// Kinematic viscosity from the mean velocity of body-force-driven channel
/// flow between bounce-back walls, against nu = cs^2*(tau_f - 1/2).
BenchResult bench_poiseuille(double tau_f);

/// Melt-front position of a 1D two-phase bar with one end held above the
/// liquidus, against the similarity solution; the reported error is the
/// maximum relative deviation over the second half of the run.
BenchResult bench_stefan();

/// Pressure jump of a resting droplet of the given radius (cells) against
/// the imposed capillary jump 2*sigma*kappa with kappa = 2/R.
BenchResult bench_laplace(int radius_cells);

/// Runs the named benchmark group ("stefan", "poiseuille", "thermal-decay",
/// "laplace"), printing one line per case. Returns false if any case failed.
/// Unknown names throw std::invalid_argument.
bool run_bench(const std::string& name);

std::string format_bench(const BenchResult& r);

}  // namespace ebm
