#pragma once

/// @file
/// Seed derivation and the Gaussian stream used by every simulator.
///
/// Replication seeds are a pure function of (master seed, keys...), so a
/// replication's draws never depend on which worker ran it or in what order.

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ivxlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Bit pattern of a double, for hashing grid coordinates such as c or rho.
inline std::uint64_t seed_key(double v) {
  if (v == 0.0) v = 0.0;  // fold -0.0 into +0.0
  return std::bit_cast<std::uint64_t>(v);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
  return h;
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace ivxlab
