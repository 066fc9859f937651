// Data-parallel inner loops shared by the integrators: windowed pair forces,
// windowed pair energy, and the gap-flow right-hand side. Each kernel has a
// serial reference path and an OpenMP path computing the same per-element
// sums in the same order, so results are bit-identical across thread counts.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coagsim/potential.hpp"

namespace coagsim::kernels {

enum class Exec { serial, parallel, automatic };

// Below this many elements the OpenMP fork/join overhead dominates;
// `automatic` picks the serial path. Crossover measured with bench_kernels.
inline constexpr std::size_t kParallelMinN = 4096;

inline bool use_parallel(Exec mode, std::size_t n) {
  if (mode == Exec::serial) return false;
  if (mode == Exec::parallel) return true;
  return n >= kParallelMinN;
}

// forces[i] = sum_{j != i, |x_i - x_j| < range} U'(x_i - x_j); x sorted.
// Gather form: every element sums its own window in ascending j order.
void pair_forces(std::span<const double> x, const PotentialSpec& spec,
                 double range, std::span<double> forces,
                 Exec mode = Exec::automatic);

// sum_{i<j, x_j - x_i < range} U(x_i - x_j). Accumulation contract: one
// partial per left index i (ascending j within the window), partials then
// reduced in ascending i order, so the total does not depend on the thread
// count or on the window size.
double pair_energy(std::span<const double> x, const PotentialSpec& spec,
                   double range, Exec mode = Exec::automatic);

// rhs[i] = (U'(g_{i+1}) + U'(g_{i-1}) - 2 U'(g_i)) / 2 with the boundary
// convention g_0 = g_N = a (so U' vanishes there for the example family).
void gap_flow_rhs(std::span<const double> gaps, const PotentialSpec& spec,
                  std::span<double> rhs, Exec mode = Exec::automatic);

// positions[i] += drift_scale * forces[i] * dt + noise[i]; noise may be
// empty for the deterministic flow. Returns true if the update kept the
// array sorted (caller re-sorts when false).
bool apply_update(std::span<double> positions, std::span<const double> forces,
                  double drift_scale, double dt, std::span<const double> noise,
                  Exec mode = Exec::automatic);

}  // namespace coagsim::kernels
