#include "coagsim/macroprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "coagsim/rng.hpp"

namespace coagsim {

double RodSystem::total_mass() const {
  double m = 0.0;
  for (const auto& g : groups) m += g.mass;
  return m;
}

double RodSystem::physical_center(const RodGroup& g) const {
  // Average of the members' shift offsets; each member's physical centre was
  // eta_tilde + a*(sum of masses to its left + half its own mass).
  double shift = 0.0;
  for (std::size_t rod : g.members) {
    double left = 0.0;
    for (std::size_t r = 0; r < rod; ++r) left += rho0[r];
    shift += a * (left + 0.5 * rho0[rod]) * rho0[rod];
  }
  return g.eta_tilde + shift / g.mass;
}

double RodSystem::eta_tilde_of_rod(std::size_t rod) const {
  for (const auto& g : groups)
    for (std::size_t r : g.members)
      if (r == rod) return g.eta_tilde;
  throw std::out_of_range("eta_tilde_of_rod: rod index not found");
}

RodSystem init_rods(const std::vector<double>& rho_list,
                    const std::vector<double>& initial_centers, double a,
                    std::uint64_t seed) {
  if (rho_list.empty() || rho_list.size() != initial_centers.size())
    throw std::invalid_argument("init_rods: need one centre per rod");
  RodSystem sys;
  sys.rho0 = rho_list;
  sys.a = a;
  sys.seed = seed;
  double cumulative = 0.0;
  for (std::size_t l = 0; l < rho_list.size(); ++l) {
    if (!(rho_list[l] > 0.0))
      throw std::invalid_argument("init_rods: masses must be > 0");
    RodGroup g;
    g.members = {l};
    g.mass = rho_list[l];
    g.eta_tilde = initial_centers[l] - a * (cumulative + 0.5 * rho_list[l]);
    cumulative += rho_list[l];
    sys.groups.push_back(g);
  }
  for (std::size_t l = 1; l < sys.groups.size(); ++l)
    if (!(sys.groups[l].eta_tilde > sys.groups[l - 1].eta_tilde))
      throw std::invalid_argument("init_rods: rods overlap or touch initially");
  return sys;
}

namespace {

// Bisection for the crossing of two linear paths on [0,1]: start gap >= 0,
// end gap < 0 (or zero).
double crossing_fraction(double l0, double l1, double r0, double r1) {
  double lo = 0.0, hi = 1.0;
  auto gap = [&](double t) { return (r0 + t * (r1 - r0)) - (l0 + t * (l1 - l0)); };
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gap(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void grid_step(RodSystem& sys, double dt, std::vector<CoagulationEvent>& events) {
  if (!(dt > 0.0)) throw std::invalid_argument("grid_step: dt must be > 0");

  const double t0 = sys.t_macro;
  double consumed = 0.0;  // fraction of the step already rolled through
  std::uint64_t substep = 0;

  std::vector<double> start(sys.groups.size()), end(sys.groups.size());
  for (std::size_t g = 0; g < sys.groups.size(); ++g)
    start[g] = sys.groups[g].eta_tilde;

  auto draw_end = [&](std::size_t g, double remaining_dt) {
    const std::uint64_t ctr =
        rng::counter(rng::Purpose::kMacro, (sys.step_count << 8) + substep);
    const double z = rng::normal(sys.seed, ctr, sys.groups[g].members.front());
    return start[g] + std::sqrt(remaining_dt / sys.groups[g].mass) * z;
  };

  for (std::size_t g = 0; g < sys.groups.size(); ++g) end[g] = draw_end(g, dt);

  while (true) {
    // earliest interpolated crossing among adjacent pairs, leftmost on ties
    double best_theta = 2.0;
    std::size_t best_left = 0;
    for (std::size_t g = 0; g + 1 < sys.groups.size(); ++g) {
      if (end[g + 1] > end[g]) continue;
      const double theta = crossing_fraction(start[g], end[g], start[g + 1], end[g + 1]);
      if (theta < best_theta) {
        best_theta = theta;
        best_left = g;
      }
    }
    if (best_theta > 1.0) break;

    // roll every group to the crossing time
    const double remaining = 1.0 - consumed;
    const double left_start = start[best_left];
    const double right_start = start[best_left + 1];
    for (std::size_t g = 0; g < sys.groups.size(); ++g)
      start[g] += best_theta * (end[g] - start[g]);
    consumed += best_theta * remaining;
    const double t_event = t0 + consumed * dt;

    CoagulationEvent ev;
    ev.t_macro = t_event;
    ev.left_members = sys.groups[best_left].members;
    ev.right_members = sys.groups[best_left + 1].members;
    ev.new_mass = sys.groups[best_left].mass + sys.groups[best_left + 1].mass;
    ev.left_path_start = left_start;
    ev.left_path_end = end[best_left];
    ev.right_path_start = right_start;
    ev.right_path_end = end[best_left + 1];
    ev.eta_tilde = 0.5 * (start[best_left] + start[best_left + 1]);
    events.push_back(ev);

    RodGroup merged;
    merged.members = sys.groups[best_left].members;
    merged.members.insert(merged.members.end(),
                          sys.groups[best_left + 1].members.begin(),
                          sys.groups[best_left + 1].members.end());
    merged.mass = ev.new_mass;
    merged.eta_tilde = ev.eta_tilde;
    sys.groups[best_left] = merged;
    sys.groups.erase(sys.groups.begin() + static_cast<std::ptrdiff_t>(best_left + 1));
    start[best_left] = merged.eta_tilde;
    start.erase(start.begin() + static_cast<std::ptrdiff_t>(best_left + 1));
    end.erase(end.begin() + static_cast<std::ptrdiff_t>(best_left + 1));

    // unmerged groups keep their interpolated targets; the merged group
    // restarts with a fresh increment over the remaining time
    ++substep;
    if (substep > 255)
      throw std::runtime_error("grid_step: merge cascade exceeded the substep budget");
    const double dt_left = dt * (1.0 - consumed);
    if (dt_left <= 0.0) {
      end[best_left] = start[best_left];
    } else {
      end[best_left] = draw_end(best_left, dt_left);
    }
  }

  for (std::size_t g = 0; g < sys.groups.size(); ++g)
    sys.groups[g].eta_tilde = end[g];
  sys.t_macro = t0 + dt;
  sys.step_count += 1;
}

RodTrajectory simulate_rods(RodSystem sys, double t_end, double dt,
                            std::uint64_t sample_stride) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate_rods: t_end must be >= 0");
  if (sample_stride == 0) sample_stride = 1;
  RodTrajectory traj;
  const std::size_t n_rods = sys.rho0.size();

  auto emit = [&]() {
    traj.times.push_back(sys.t_macro);
    std::vector<double> row(n_rods);
    for (std::size_t r = 0; r < n_rods; ++r) row[r] = sys.eta_tilde_of_rod(r);
    traj.eta_tilde_by_rod.push_back(std::move(row));
  };

  emit();
  const auto steps = static_cast<std::uint64_t>(std::ceil(t_end / dt - 1e-12));
  for (std::uint64_t s = 1; s <= steps; ++s) {
    grid_step(sys, std::min(dt, t_end - sys.t_macro), traj.events);
    if (s % sample_stride == 0 || s == steps) emit();
    if (sys.t_macro >= t_end) break;
  }
  return traj;
}

double exact_two_rod_meeting(double gap, double rho1, double rho2,
                             std::uint64_t seed, std::uint64_t draw_index) {
  if (!(gap > 0.0)) throw std::invalid_argument("exact_two_rod_meeting: gap must be > 0");
  if (!(rho1 > 0.0 && rho2 > 0.0))
    throw std::invalid_argument("exact_two_rod_meeting: masses must be > 0");
  const double v = 1.0 / rho1 + 1.0 / rho2;
  double z = std::fabs(
      rng::normal(seed, rng::counter(rng::Purpose::kSampler, draw_index), 0));
  if (z < 1e-300) z = 1e-300;
  const double r = gap / (std::sqrt(v) * z);
  return r * r;
}

double grid_two_rod_meeting(double gap, double rho1, double rho2, double dt,
                            double t_cap, std::uint64_t seed) {
  // a = 0 keeps shifted centres equal to the physical ones, so gap is the
  // shifted-centre distance directly.
  RodSystem sys = init_rods({rho1, rho2}, {0.0, gap}, 0.0, seed);
  std::vector<CoagulationEvent> events;
  while (sys.t_macro < t_cap && sys.groups.size() > 1) {
    grid_step(sys, std::min(dt, t_cap - sys.t_macro), events);
    if (!events.empty()) return events.front().t_macro;
  }
  return t_cap;
}

}  // namespace coagsim
