#ifndef FACTORIAL_RNG_HPP
#define FACTORIAL_RNG_HPP

// Splittable randomness for the simulation harness: per-replicate substreams
// are derived from (seed, stream index) with the SplitMix64 mixer, so
// replicates can run concurrently yet reproduce the sequential results
// bit for bit. Draw helpers avoid the implementation-defined std
// distributions so output is identical across standard libraries.

#include <cstdint>
#include <random>
#include <vector>

namespace factorial {

inline std::uint64_t split_mix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Engine for substream `stream` of the master seed.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  return std::mt19937_64(split_mix64(s));
}

// Uniform draw on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard exponential via inverse CDF.
inline double exponential1(std::mt19937_64& rng) {
  double u = uniform01(rng);
  while (u == 0.0) u = uniform01(rng);  // log(0) guard
  return -std::log(u);
}

// Unbiased draw from {0, ..., n-1} by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

// Fisher-Yates shuffle with the rejection sampler above.
template <typename T>
void shuffle_values(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace factorial

#endif
