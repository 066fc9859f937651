// Euler-Maruyama integration of the interacting-particle SDE with the
// macroscopic time change applied as clock bookkeeping, plus the noiseless
// gradient flow in position and gap coordinates.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "coagsim/potential.hpp"

namespace coagsim {

struct RegimeFlags {
  bool coagulation = false;  // alpha > 4 and mu > 1/2
  bool tube = false;         // nu > 2 and alpha > 2*nu + 3
  bool relaxation = false;   // alpha > 2*nu_tilde + 3
};

struct ScalingParams {
  double epsilon = 0.0;  // lattice ratio, in (0,1)
  double alpha = 0.0;    // inverse-temperature exponent, > 0
  std::vector<double> rho_list;          // macroscopic masses per chain
  std::vector<std::int64_t> n_particles_list;  // N_l = round(rho_l / epsilon)
  double mu = 0.0;        // initial-fluctuation exponent
  double nu = 0.0;        // tube exponent
  double nu_tilde = 0.0;  // target tube exponent
  double dt_safety = 1.0;  // explicit-step safety factor, in (0,1]
  std::optional<double> dt_override;  // replaces the conservative step bound

  std::int64_t total_particles() const {
    std::int64_t n = 0;
    for (auto v : n_particles_list) n += v;
    return n;
  }
  double inv_temperature() const;  // epsilon^(-alpha)
  RegimeFlags regime_flags() const;
};

// Fills n_particles_list from rho_list (round half away from zero) and
// validates the basics (every N_l >= 2 among them).
ScalingParams make_scaling_params(double epsilon, double alpha,
                                  std::vector<double> rho_list, double mu,
                                  double nu, double nu_tilde,
                                  double dt_safety = 1.0,
                                  std::optional<double> dt_override = {});

struct ParticleState {
  std::vector<double> positions;  // nondecreasing
  double t_micro = 0.0;
  std::uint64_t seed = 0;        // replica stream
  std::uint64_t step_count = 0;  // together with seed: the generator state
};

double hamiltonian(const ParticleState& state, const PotentialSpec& spec);
std::vector<double> grad_hamiltonian(const ParticleState& state,
                                     const PotentialSpec& spec);

// s_f * epsilon^alpha / (2 * c_check * N): linearised explicit-step bound
// for the nearest-neighbour chain with an N-fold spectral margin.
double stable_dt(const ScalingParams& params, double c_check);

// The step bound em_step enforces: dt_override when configured, else
// stable_dt with c_check read off the potential.
double max_step(const ScalingParams& params, const PotentialSpec& spec);

// One Euler-Maruyama step; throws std::invalid_argument when
// dt > max_step(params, spec). noise, when supplied, is the raw Brownian
// increment per particle (testing hook); otherwise increments are drawn
// from the state's counter stream. Positions are re-sorted when noise
// reorders them.
void em_step(ParticleState& state, double dt, const ScalingParams& params,
             const PotentialSpec& spec);
void em_step_with_noise(ParticleState& state, double dt,
                        const ScalingParams& params, const PotentialSpec& spec,
                        std::span<const double> noise);

struct TrajectorySample {
  double t_macro = 0.0;
  double com = 0.0;
  double energy = 0.0;
  double grad_norm_inf = 0.0;  // max |gap - a|
  std::size_t n_segments = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<double> snapshot_times;          // only when snapshots are kept
  std::vector<std::vector<double>> snapshots;  // positions per kept sample
};

// Called at every sample; return false to stop the run early.
using Observer = std::function<bool(const ParticleState&, double t_macro)>;

struct SimulateOptions {
  bool record_snapshots = false;
  bool with_noise = true;  // false integrates the plain gradient flow
};

// Integrates to microscopic time epsilon^-3 * t_macro_end, sampling every
// sample_every macroscopic units (partial steps land exactly on the grid).
Trajectory simulate_micro(const ParticleState& initial, double t_macro_end,
                          double sample_every, const ScalingParams& params,
                          const PotentialSpec& spec,
                          const Observer& observer = nullptr,
                          const SimulateOptions& options = {});

struct GapFlowSample {
  double t_micro = 0.0;
  double energy = 0.0;
  std::vector<double> gaps;
};

// Explicit Euler on the noiseless flow at dt = stable_dt; records the gap
// vector per sample (about max_samples rows plus the endpoint).
std::vector<GapFlowSample> integrate_gradient_flow(const ParticleState& initial,
                                                   double t_end_micro,
                                                   const ScalingParams& params,
                                                   const PotentialSpec& spec,
                                                   std::size_t max_samples = 512);

// One explicit Euler step of the gap equation with boundary values a;
// requires positive gaps and dt within the stable bound.
std::vector<double> gap_flow_step(std::span<const double> gaps, double dt,
                                  const ScalingParams& params,
                                  const PotentialSpec& spec);

enum class InitialKind { single, two_chain, n_chain };
enum class GapMode { exact, uniform };

// Builds the initial configuration with the leftmost particle at 0.
// single: one chain of N_0 particles; two_chain: inter-chain gap exactly b;
// n_chain: consecutive chains separated by the given macroscopic edge gaps
// (converted by 1/epsilon), defaulting to b when empty. Rejects
// epsilon^mu > b - a.
ParticleState build_initial(InitialKind kind, const ScalingParams& params,
                            const PotentialSpec& spec, GapMode gap_mode,
                            std::uint64_t seed,
                            std::span<const double> separations_macro = {});

}  // namespace coagsim
