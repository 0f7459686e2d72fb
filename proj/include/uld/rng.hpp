#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace uld {

// splitmix64 finalizer; used to derive independent substream seeds from a
// master seed plus a path of counters. Counter-based derivation keeps parallel
// chains and per-step (Brownian, midpoint) streams reproducible regardless of
// thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Single-owner random stream. Not thread-safe; each worker derives its own.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  static RngStream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t id : path) s = splitmix64(s ^ (id * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    return RngStream(s);
  }

  double normal() { return normal_(eng_); }

  // Uniform on the open interval (0, 1): never returns an exact endpoint.
  double uniform_open() {
    return static_cast<double>((eng_() >> 11)) * 0x1.0p-53 + 0x1.0p-54;
  }

  std::uint64_t raw() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace uld
