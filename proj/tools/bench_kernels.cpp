// Benchmark of the serial reference kernels against the OpenMP paths across
// a particle-count ladder. Prints one table row per N with timings and
// speedups; use it to pick the automatic-mode crossover.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "coagsim/kernels.hpp"
#include "coagsim/potential.hpp"
#include "coagsim/rng.hpp"

using namespace coagsim;
using Clock = std::chrono::steady_clock;

namespace {

double time_us(int reps, const std::function<void()>& fn) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::micro>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  const PotentialSpec spec = build_example_potential(4.0);
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled in this build\n");
#endif
  std::printf("%8s %14s %14s %9s %14s %14s %9s\n", "N", "force_ser(us)",
              "force_omp(us)", "speedup", "energy_ser(us)", "energy_omp(us)",
              "speedup");

  for (std::size_t n : {64u, 256u, 1024u, 4096u, 16384u, 65536u, 262144u}) {
    std::vector<double> x(n), f(n);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pos += 4.0 + 0.2 * (rng::uniform(rng::counter_hash(7, i, 0)) - 0.5);
      x[i] = pos;
    }
    const int reps = n >= 65536 ? 20 : 200;
    const double fs = time_us(reps, [&] {
      kernels::pair_forces(x, spec, spec.range(), f, kernels::Exec::serial);
    });
    const double fp = time_us(reps, [&] {
      kernels::pair_forces(x, spec, spec.range(), f, kernels::Exec::parallel);
    });
    volatile double sink = 0.0;
    const double es = time_us(reps, [&] {
      sink = kernels::pair_energy(x, spec, spec.range(), kernels::Exec::serial);
    });
    const double ep = time_us(reps, [&] {
      sink = kernels::pair_energy(x, spec, spec.range(), kernels::Exec::parallel);
    });
    (void)sink;
    std::printf("%8zu %14.2f %14.2f %9.2f %14.2f %14.2f %9.2f\n", n, fs, fp,
                fs / fp, es, ep, es / ep);
  }
  return 0;
}
