#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evoplat {

// All randomness flows through mt19937_64 plus the hand-rolled draws below.
// The standard specifies the generator's output exactly; the standard
// distributions are implementation-defined, so we never use them. Every run
// is therefore reproducible bit-for-bit from its seed alone.
using Rng = std::mt19937_64;

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Independent stream addressed by (seed, tag, a, b). Used so that work done
// per generation/slot does not depend on scheduling order.
inline Rng make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a = 0,
                       std::uint64_t b = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(tag));
  h = mix64(h ^ mix64(a));
  h = mix64(h ^ mix64(b));
  return Rng(h);
}

// Uniform in [0, 1), 53-bit resolution.
inline double next_double(Rng& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Lemire multiply-shift; bias < 2^-64 per draw.
inline std::uint64_t next_index(Rng& g, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(g()) * n) >> 64);
}

// Uniform integer in [lo, hi] inclusive.
inline long long next_int(Rng& g, long long lo, long long hi) {
  return lo + static_cast<long long>(next_index(g, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Box-Muller, one value per call (the sine half is discarded so the draw
// count per call stays fixed at 2).
inline double next_normal(Rng& g, double mean = 0.0, double stdev = 1.0) {
  double u1 = next_double(g);
  double u2 = next_double(g);
  if (u1 < 1e-300) u1 = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stdev * r * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace evoplat
