#pragma once
// Deterministic random streams.
//
// Every random draw in the pipeline flows through an RngStream keyed by
// (seed, stream id). The uniform and gaussian transforms are spelled out here
// instead of using std::*_distribution, whose output is implementation
// defined; this keeps results bit-identical across compilers and across
// serial/parallel schedules.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>

namespace mmnoma {

// Stream ids reserved by the pipeline. Particle p of the beamformer swarm
// draws from stream kParticleStreamBase + p.
inline constexpr std::uint64_t kChannelStream = 1;
inline constexpr std::uint64_t kGroupingStream = 2;
inline constexpr std::uint64_t kSwarmInitStream = 3;
inline constexpr std::uint64_t kParticleStreamBase = 16;

namespace detail {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 output function, used as a seed mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Seed for one realization of a Monte-Carlo experiment. The double mix keeps
// realization seeds disjoint from the per-stage stream seeds used below.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t realization) {
  return detail::mix64(detail::mix64(master + detail::kGamma * (realization + 1)));
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(detail::mix64(seed + detail::kGamma * (stream + 1))) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform in (lo, hi]; the lower endpoint is excluded.
  double uniform_open_closed(double lo, double hi) {
    return hi - (hi - lo) * uniform();
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex gaussian with unit variance, CN(0, 1).
  std::complex<double> complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

  // Uniform integer in [0, n), n >= 1. Rejection keeps the draw unbiased.
  std::uint64_t uniform_int(std::uint64_t n) {
    constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t excess = (kMax % n + 1) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x <= kMax - excess) return x % n;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mmnoma
