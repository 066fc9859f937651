#include "coagsim/kernels.hpp"

#include <cstdint>

namespace coagsim::kernels {

namespace {

inline double force_at(std::span<const double> x, const PotentialSpec& spec,
                       double range, std::size_t i) {
  const double xi = x[i];
  std::size_t lo = i;
  while (lo > 0 && xi - x[lo - 1] < range) --lo;
  double f = 0.0;
  for (std::size_t j = lo; j < i; ++j) f += spec.eval(xi - x[j], 1);
  for (std::size_t j = i + 1; j < x.size() && x[j] - xi < range; ++j)
    f += spec.eval(xi - x[j], 1);
  return f;
}

inline double energy_partial(std::span<const double> x, const PotentialSpec& spec,
                             double range, std::size_t i) {
  const double xi = x[i];
  double e = 0.0;
  for (std::size_t j = i + 1; j < x.size() && x[j] - xi < range; ++j)
    e += spec.eval(xi - x[j], 0);
  return e;
}

inline double gap_rhs_at(std::span<const double> g, const PotentialSpec& spec,
                         std::size_t i) {
  const double left = i > 0 ? spec.eval(g[i - 1], 1) : 0.0;
  const double right = i + 1 < g.size() ? spec.eval(g[i + 1], 1) : 0.0;
  return 0.5 * (right + left - 2.0 * spec.eval(g[i], 1));
}

}  // namespace

void pair_forces(std::span<const double> x, const PotentialSpec& spec,
                 double range, std::span<double> forces, Exec mode) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (use_parallel(mode, x.size())) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      forces[static_cast<std::size_t>(i)] =
          force_at(x, spec, range, static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      forces[static_cast<std::size_t>(i)] =
          force_at(x, spec, range, static_cast<std::size_t>(i));
  }
}

double pair_energy(std::span<const double> x, const PotentialSpec& spec,
                   double range, Exec mode) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  if (use_parallel(mode, x.size())) {
    static thread_local std::vector<double> scratch;
    scratch.resize(x.size());
    double* partial = scratch.data();  // shared buffer inside the region
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      partial[i] = energy_partial(x, spec, range, static_cast<std::size_t>(i));
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += partial[i];
    return s;
  }
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i)
    s += energy_partial(x, spec, range, static_cast<std::size_t>(i));
  return s;
}

void gap_flow_rhs(std::span<const double> gaps, const PotentialSpec& spec,
                  std::span<double> rhs, Exec mode) {
  const std::int64_t n = static_cast<std::int64_t>(gaps.size());
  if (use_parallel(mode, gaps.size())) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      rhs[static_cast<std::size_t>(i)] =
          gap_rhs_at(gaps, spec, static_cast<std::size_t>(i));
  } else {
    for (std::int64_t i = 0; i < n; ++i)
      rhs[static_cast<std::size_t>(i)] =
          gap_rhs_at(gaps, spec, static_cast<std::size_t>(i));
  }
}

bool apply_update(std::span<double> positions, std::span<const double> forces,
                  double drift_scale, double dt, std::span<const double> noise,
                  Exec mode) {
  const std::int64_t n = static_cast<std::int64_t>(positions.size());
  const bool with_noise = !noise.empty();
  if (use_parallel(mode, positions.size())) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      positions[u] += drift_scale * forces[u] * dt + (with_noise ? noise[u] : 0.0);
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      positions[u] += drift_scale * forces[u] * dt + (with_noise ? noise[u] : 0.0);
    }
  }
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (positions[i] < positions[i - 1]) return false;
  return true;
}

}  // namespace coagsim::kernels
