#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace hosm {

// Deterministic counter-style generator (splitmix64 core). Every stochastic
// stage owns an explicit stream derived from (seed, stream id), so parallel
// and sequential execution draw identical values.
struct Rng {
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  bool has_cached = false;
  double cached = 0.0;

  Rng() = default;
  explicit Rng(std::uint64_t seed) : state(mix(seed ^ 0xA0761D6478BD642FULL)) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Independent stream for e.g. one chain or one training stage.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    Rng r;
    r.state = mix(mix(seed) ^ mix(stream_id * 0xD1B54A32D192ED03ULL + 0x8BB84B93962EACC9ULL));
    return r;
  }

  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Box-Muller with cached second deviate; no rejection, so the draw count
  // per call is fixed and streams stay aligned.
  double gaussian() {
    if (has_cached) {
      has_cached = false;
      return cached;
    }
    double u1 = uniform();
    double u2 = uniform();
    // log argument in (0, 1]
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached = r * std::sin(a);
    has_cached = true;
    return r * std::cos(a);
  }

  std::vector<double> gaussian_vec(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = gaussian();
    return v;
  }

  // Integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }
};

}  // namespace hosm
