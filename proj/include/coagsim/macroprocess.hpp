// The limit process: independent massive Brownian rods that coalesce on
// contact, masses adding and diffusivity dropping accordingly. Grid
// simulator with interpolation-bisection event localisation, plus an exact
// first-passage sampler for the two-rod meeting time.

#pragma once

#include <cstdint>
#include <vector>

namespace coagsim {

struct RodGroup {
  std::vector<std::size_t> members;  // original rod indices, ascending
  double mass = 0.0;
  double eta_tilde = 0.0;  // shifted centre
};

struct CoagulationEvent {
  double t_macro = 0.0;
  std::vector<std::size_t> left_members;
  std::vector<std::size_t> right_members;
  double new_mass = 0.0;
  double eta_tilde = 0.0;  // common shifted centre at the merge
  // interpolation segments the crossing was located on (for diagnostics:
  // the merge value lies on both)
  double left_path_start = 0.0, left_path_end = 0.0;
  double right_path_start = 0.0, right_path_end = 0.0;
};

struct RodSystem {
  std::vector<RodGroup> groups;  // ordered left to right
  std::vector<double> rho0;      // original masses, by rod index
  double a = 0.0;
  double t_macro = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step_count = 0;

  double total_mass() const;
  // Physical centre of a group, recovered from the shift over original-rod
  // order; stays continuous through merges.
  double physical_center(const RodGroup& g) const;
  // eta_tilde of the group containing original rod `rod`.
  double eta_tilde_of_rod(std::size_t rod) const;
};

// Shifted centres from physical centres; rejects configurations whose
// shifted centres are not strictly increasing (overlapping or touching rods).
RodSystem init_rods(const std::vector<double>& rho_list,
                    const std::vector<double>& initial_centers, double a,
                    std::uint64_t seed);

// One grid step of size dt: independent increments of variance dt/mass per
// group, then crossings located by bisection on the linearly interpolated
// paths and resolved earliest-first (leftmost on ties). Appends any merge
// events to `events`.
void grid_step(RodSystem& sys, double dt, std::vector<CoagulationEvent>& events);

struct RodTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> eta_tilde_by_rod;  // row per sample
  std::vector<CoagulationEvent> events;
};

// Runs grid_step to t_end, recording every sample_stride-th step (and the
// endpoint).
RodTrajectory simulate_rods(RodSystem sys, double t_end, double dt,
                            std::uint64_t sample_stride = 1);

// Exact sample of the first time two rods at shifted-centre distance `gap`
// meet: T = (gap / (sqrt(v) |Z|))^2 with v = 1/rho1 + 1/rho2, by the
// reflection principle. draw_index selects the sample within the stream.
double exact_two_rod_meeting(double gap, double rho1, double rho2,
                             std::uint64_t seed, std::uint64_t draw_index = 0);

// Grid-simulated two-rod meeting time, censored at t_cap.
double grid_two_rod_meeting(double gap, double rho1, double rho2, double dt,
                            double t_cap, std::uint64_t seed);

}  // namespace coagsim
