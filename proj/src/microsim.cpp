#include "coagsim/microsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "coagsim/diagnostics.hpp"
#include "coagsim/kernels.hpp"
#include "coagsim/rng.hpp"

namespace coagsim {

double ScalingParams::inv_temperature() const { return std::pow(epsilon, -alpha); }

RegimeFlags ScalingParams::regime_flags() const {
  RegimeFlags f;
  f.coagulation = alpha > 4.0 && mu > 0.5;
  f.tube = nu > 2.0 && alpha > 2.0 * nu + 3.0;
  f.relaxation = alpha > 2.0 * nu_tilde + 3.0;
  return f;
}

ScalingParams make_scaling_params(double epsilon, double alpha,
                                  std::vector<double> rho_list, double mu,
                                  double nu, double nu_tilde, double dt_safety,
                                  std::optional<double> dt_override) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("params: epsilon must be in (0,1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("params: alpha must be > 0");
  if (rho_list.empty()) throw std::invalid_argument("params: rho list empty");
  if (!(dt_safety > 0.0 && dt_safety <= 1.0))
    throw std::invalid_argument("params: dt_safety must be in (0,1]");
  ScalingParams p;
  p.epsilon = epsilon;
  p.alpha = alpha;
  p.mu = mu;
  p.nu = nu;
  p.nu_tilde = nu_tilde;
  p.dt_safety = dt_safety;
  p.dt_override = dt_override;
  for (double rho : rho_list) {
    if (!(rho > 0.0)) throw std::invalid_argument("params: rho must be > 0");
    const std::int64_t n = std::llround(rho / epsilon);
    if (n < 2) throw std::invalid_argument("params: chain needs N >= 2 particles");
    p.n_particles_list.push_back(n);
  }
  p.rho_list = std::move(rho_list);
  return p;
}

double hamiltonian(const ParticleState& state, const PotentialSpec& spec) {
  return kernels::pair_energy(state.positions, spec, spec.range());
}

std::vector<double> grad_hamiltonian(const ParticleState& state,
                                     const PotentialSpec& spec) {
  std::vector<double> f(state.positions.size());
  kernels::pair_forces(state.positions, spec, spec.range(), f);
  return f;
}

double stable_dt(const ScalingParams& params, double c_check) {
  const double n = static_cast<double>(params.total_particles());
  return params.dt_safety * std::pow(params.epsilon, params.alpha) /
         (2.0 * c_check * n);
}

double max_step(const ScalingParams& params, const PotentialSpec& spec) {
  if (params.dt_override) return *params.dt_override;
  return stable_dt(params, spec.eval(spec.a, 2));
}

namespace {

// Shared step core: forces, drift + noise update, conditional re-sort.
// The noise span may be empty (plain gradient flow).
void step_core(ParticleState& state, double dt, const ScalingParams& params,
               const PotentialSpec& spec, std::span<const double> noise,
               std::vector<double>& force_ws) {
  const std::size_t n = state.positions.size();
  force_ws.resize(n);
  kernels::pair_forces(state.positions, spec, spec.range(), force_ws);
  const double drift_scale = -0.5 * params.inv_temperature();
  const bool sorted = kernels::apply_update(state.positions, force_ws,
                                            drift_scale, dt, noise);
  if (!sorted) std::sort(state.positions.begin(), state.positions.end());
  state.t_micro += dt;
  state.step_count += 1;
}

void fill_step_noise(const ParticleState& state, double dt,
                     std::vector<double>& noise) {
  const std::size_t n = noise.size();
  const double scale = std::sqrt(dt);
  const std::uint64_t ctr = rng::counter(rng::Purpose::kStep, state.step_count);
  for (std::size_t k = 0; 2 * k < n; ++k) {
    const auto pair = rng::normal_pair(state.seed, ctr, k);
    noise[2 * k] = scale * pair.z0;
    if (2 * k + 1 < n) noise[2 * k + 1] = scale * pair.z1;
  }
}

void check_dt(double dt, const ScalingParams& params, const PotentialSpec& spec) {
  if (!(dt >= 0.0)) throw std::invalid_argument("em_step: dt must be >= 0");
  const double bound = max_step(params, spec);
  if (dt > bound * (1.0 + 1e-12))
    throw std::invalid_argument("em_step: dt exceeds the stable step bound");
}

}  // namespace

void em_step(ParticleState& state, double dt, const ScalingParams& params,
             const PotentialSpec& spec) {
  check_dt(dt, params, spec);
  if (dt == 0.0) return;
  std::vector<double> noise(state.positions.size());
  fill_step_noise(state, dt, noise);
  std::vector<double> ws;
  step_core(state, dt, params, spec, noise, ws);
}

void em_step_with_noise(ParticleState& state, double dt,
                        const ScalingParams& params, const PotentialSpec& spec,
                        std::span<const double> noise) {
  check_dt(dt, params, spec);
  if (dt == 0.0 && noise.empty()) return;
  std::vector<double> ws;
  step_core(state, dt, params, spec, noise, ws);
}

namespace {

TrajectorySample make_sample(const ParticleState& state, double t_macro,
                             const PotentialSpec& spec) {
  TrajectorySample s;
  s.t_macro = t_macro;
  s.com = center_of_mass(state.positions);
  s.energy = hamiltonian(state, spec);
  double gmax = 0.0;
  for (std::size_t i = 0; i + 1 < state.positions.size(); ++i)
    gmax = std::max(gmax,
                    std::fabs(state.positions[i + 1] - state.positions[i] - spec.a));
  s.grad_norm_inf = gmax;
  s.n_segments = segment_view(state.positions, spec.range()).segments.size();
  return s;
}

}  // namespace

Trajectory simulate_micro(const ParticleState& initial, double t_macro_end,
                          double sample_every, const ScalingParams& params,
                          const PotentialSpec& spec, const Observer& observer,
                          const SimulateOptions& options) {
  if (!(t_macro_end >= 0.0))
    throw std::invalid_argument("simulate_micro: t_macro_end must be >= 0");
  if (!(sample_every > 0.0))
    throw std::invalid_argument("simulate_micro: sample_every must be > 0");

  const double time_change = std::pow(params.epsilon, -3.0);
  const double t_end_micro = t_macro_end * time_change;
  const double dt_base = max_step(params, spec);

  ParticleState state = initial;
  Trajectory traj;
  std::vector<double> noise(state.positions.size());
  std::vector<double> ws;

  auto emit = [&](double t_macro) {
    traj.samples.push_back(make_sample(state, t_macro, spec));
    if (options.record_snapshots) {
      traj.snapshot_times.push_back(t_macro);
      traj.snapshots.push_back(state.positions);
    }
    return observer ? observer(state, t_macro) : true;
  };

  if (!emit(0.0) || t_macro_end == 0.0) return traj;

  std::size_t sample_idx = 1;
  double t_next = std::min(sample_every * static_cast<double>(sample_idx) *
                               time_change,
                           t_end_micro);
  while (state.t_micro < t_end_micro) {
    const double dt = std::min(dt_base, t_next - state.t_micro);
    if (options.with_noise) {
      fill_step_noise(state, dt, noise);
      step_core(state, dt, params, spec, noise, ws);
    } else {
      step_core(state, dt, params, spec, {}, ws);
    }
    if (state.t_micro >= t_next * (1.0 - 1e-15)) {
      const double t_macro = state.t_micro / time_change;
      if (!emit(t_macro)) return traj;
      ++sample_idx;
      t_next = std::min(sample_every * static_cast<double>(sample_idx) *
                            time_change,
                        t_end_micro);
      if (t_next <= state.t_micro) break;
    }
  }
  return traj;
}

std::vector<GapFlowSample> integrate_gradient_flow(const ParticleState& initial,
                                                   double t_end_micro,
                                                   const ScalingParams& params,
                                                   const PotentialSpec& spec,
                                                   std::size_t max_samples) {
  if (!(t_end_micro >= 0.0))
    throw std::invalid_argument("gradient_flow: t_end_micro must be >= 0");
  const double dt = stable_dt(params, spec.eval(spec.a, 2));
  const auto total_steps =
      static_cast<std::uint64_t>(std::ceil(t_end_micro / dt));
  const std::uint64_t stride =
      std::max<std::uint64_t>(1, total_steps / std::max<std::size_t>(1, max_samples));

  ParticleState state = initial;
  std::vector<GapFlowSample> out;
  std::vector<double> ws;

  auto emit = [&]() {
    GapFlowSample s;
    s.t_micro = state.t_micro;
    s.energy = hamiltonian(state, spec);
    s.gaps.resize(state.positions.size() - 1);
    for (std::size_t i = 0; i + 1 < state.positions.size(); ++i)
      s.gaps[i] = state.positions[i + 1] - state.positions[i];
    out.push_back(std::move(s));
  };

  emit();
  for (std::uint64_t step = 1; step <= total_steps; ++step) {
    const double h = std::min(dt, t_end_micro - state.t_micro);
    if (h <= 0.0) break;
    step_core(state, h, params, spec, {}, ws);
    if (step % stride == 0 || step == total_steps) emit();
  }
  return out;
}

std::vector<double> gap_flow_step(std::span<const double> gaps, double dt,
                                  const ScalingParams& params,
                                  const PotentialSpec& spec) {
  for (double g : gaps)
    if (!(g > 0.0)) throw std::invalid_argument("gap_flow_step: gaps must be > 0");
  check_dt(dt, params, spec);
  std::vector<double> rhs(gaps.size());
  kernels::gap_flow_rhs(gaps, spec, rhs);
  std::vector<double> out(gaps.begin(), gaps.end());
  const double scale = params.inv_temperature() * dt;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * rhs[i];
  return out;
}

ParticleState build_initial(InitialKind kind, const ScalingParams& params,
                            const PotentialSpec& spec, GapMode gap_mode,
                            std::uint64_t seed,
                            std::span<const double> separations_macro) {
  const double a = spec.a;
  const double b = spec.range();
  const double fluct = std::pow(params.epsilon, params.mu);
  if (gap_mode == GapMode::uniform && fluct > b - a)
    throw std::invalid_argument(
        "build_initial: epsilon^mu exceeds b - a, outside the tube domain");

  const std::size_t n_chains = kind == InitialKind::single ? 1
                               : kind == InitialKind::two_chain
                                   ? 2
                                   : params.n_particles_list.size();
  if (params.n_particles_list.size() < n_chains)
    throw std::invalid_argument("build_initial: not enough chains in params");
  if (kind == InitialKind::n_chain && !separations_macro.empty() &&
      separations_macro.size() != n_chains - 1)
    throw std::invalid_argument("build_initial: need one separation per adjacent pair");

  ParticleState state;
  state.seed = seed;
  std::uint64_t draw = 0;
  double x = 0.0;
  for (std::size_t c = 0; c < n_chains; ++c) {
    if (c > 0) {
      double sep = b;
      if (kind == InitialKind::n_chain && !separations_macro.empty())
        sep = separations_macro[c - 1] / params.epsilon;
      x += sep;
    }
    const auto n = static_cast<std::size_t>(params.n_particles_list[c]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) {
        double gap = a;
        if (gap_mode == GapMode::uniform)
          gap += fluct * (2.0 * rng::uniform(rng::counter_hash(
                                    seed, rng::counter(rng::Purpose::kInit, draw),
                                    0)) -
                          1.0);
        ++draw;
        x += gap;
      }
      state.positions.push_back(x);
    }
  }
  return state;
}

}  // namespace coagsim
