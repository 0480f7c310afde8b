#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace critlab {

// splitmix64 finalizer; the whole randomness model is built on stateless mixing
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b + 0x632be59bd9b4e019ULL)); }

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) { return mix64(mix64(a, b), c); }

// named sub-stream of a seed, e.g. derive_seed(seed, "percolation")
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : name) h = (h ^ static_cast<unsigned char>(ch)) * 0x100000001b3ULL;
  return mix64(seed, h);
}

constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Sequential generator for paths (SLE driving, diffusion); one per path.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double normal() { return gauss_(engine_); }
  double uniform() { return unit_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_;
  std::uniform_real_distribution<double> unit_;
};

}  // namespace critlab
