#pragma once

namespace ebm {

/// Compensated (Kahan-Neumaier) accumulator. The energy-budget bookkeeping
/// must close to ~1e-12 relative over millions of additions, which plain
/// double accumulation cannot guarantee.
struct Kahan {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if ((sum >= 0 ? sum : -sum) >= (x >= 0 ? x : -x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  void add(const Kahan& other) {
    add(other.sum);
    add(other.comp);
  }

  double value() const { return sum + comp; }

  void reset() { sum = comp = 0.0; }
};

}  // namespace ebm
