#pragma once

#include <cmath>
#include <cstdint>

namespace ebm {

/// SplitMix64 counter generator. Chosen over <random> engines+distributions
/// because the standard library's distribution algorithms are
/// implementation-defined; this generator produces bit-identical streams on
/// every platform, which the reproducibility guarantees require.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; never returns exactly zero (safe for logs
  /// and divisions).
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal via Box-Muller (polar-free form, deterministic count of
  /// two draws per call; the second variate is cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  /// Derive an independent stream (for parallel reproducibility).
  Rng split(std::uint64_t stream_id) const {
    Rng r(state_ ^ (0x6a09e667f3bcc909ull * (stream_id + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace ebm
