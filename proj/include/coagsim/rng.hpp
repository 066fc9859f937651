// Counter-based random number generation.
//
// Every random quantity in the simulator is a pure function of
// (stream seed, counter, lane), so replicas are reproducible bit-for-bit
// regardless of thread count or scheduling. Streams never carry mutable
// state through the physics loops.

#pragma once

#include <cmath>
#include <cstdint>

namespace coagsim::rng {

constexpr double kTwoPi = 6.283185307179586476925286766559;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Mixes a (seed, counter, lane) triple into one 64-bit word by chained
// rounds of the splitmix finalizer.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter,
                                  std::uint64_t lane) {
  std::uint64_t z = splitmix64(seed ^ (counter * 0xd1342543de82ef95ULL));
  z = splitmix64(z ^ (lane * 0xaf251af3b0f025b5ULL));
  return splitmix64(z + counter);
}

// Uniform in (0, 1]; never returns 0 so log() is safe.
inline double uniform_open0(std::uint64_t word) {
  return static_cast<double>((word >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double uniform(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

struct NormalPair {
  double z0;
  double z1;
};

// Box-Muller pair from the (seed, counter, lane) triple. Exact standard
// normals; fixed draw count per triple so parallel lanes stay aligned.
inline NormalPair normal_pair(std::uint64_t seed, std::uint64_t counter,
                              std::uint64_t lane) {
  const std::uint64_t w0 = counter_hash(seed, counter, 2 * lane);
  const std::uint64_t w1 = counter_hash(seed, counter, 2 * lane + 1);
  const double r = std::sqrt(-2.0 * std::log(uniform_open0(w0)));
  const double t = kTwoPi * uniform(w1);
  return {r * std::cos(t), r * std::sin(t)};
}

inline double normal(std::uint64_t seed, std::uint64_t counter,
                     std::uint64_t lane) {
  return normal_pair(seed, counter, lane).z0;
}

// Uniform in [lo, hi).
inline double uniform_in(std::uint64_t seed, std::uint64_t counter,
                         std::uint64_t lane, double lo, double hi) {
  return lo + (hi - lo) * uniform(counter_hash(seed, counter, lane));
}

// Counter namespaces: keeps initial-condition draws, integrator noise and
// sampler draws in disjoint regions of one stream.
enum class Purpose : std::uint64_t {
  kInit = 0x1000000000000000ULL,
  kStep = 0x2000000000000000ULL,
  kMacro = 0x3000000000000000ULL,
  kSampler = 0x4000000000000000ULL,
  kTest = 0x7000000000000000ULL,
};

inline std::uint64_t counter(Purpose p, std::uint64_t k) {
  return static_cast<std::uint64_t>(p) + k;
}

// Replica r of a run seeded with master_seed uses stream master_seed + r.
inline std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t r) {
  return master_seed + r;
}

}  // namespace coagsim::rng
