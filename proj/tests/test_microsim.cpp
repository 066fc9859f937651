#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coagsim/diagnostics.hpp"
#include "coagsim/microsim.hpp"
#include "coagsim/potential.hpp"
#include "coagsim/rng.hpp"

using namespace coagsim;

namespace {

const PotentialSpec& spec4() {
  static const PotentialSpec s = build_example_potential(4.0);
  return s;
}

ParticleState equal_chain(std::size_t n, double a = 4.0) {
  ParticleState st;
  for (std::size_t i = 0; i < n; ++i)
    st.positions.push_back(a * static_cast<double>(i));
  return st;
}

// Gentle parameters for unit tests: mild stiffness, one chain of n.
ScalingParams gentle(double n_rho = 8, double eps = 0.5, double alpha = 2.0) {
  return make_scaling_params(eps, alpha, {n_rho * eps}, 1.2, 1.0, 0.8);
}

double sum_forces(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return s;
}

}  // namespace

TEST_CASE("hamiltonian on small lattices") {
  ParticleState two;
  two.positions = {0.0, 4.0};
  CHECK_EQ(hamiltonian(two, spec4()), -4.0);
  ParticleState three;
  three.positions = {0.0, 4.0, 8.0};
  // the outer pair sits at distance 2a >= b and does not interact
  CHECK_EQ(hamiltonian(three, spec4()), -8.0);
}

TEST_CASE("hamiltonian equals the full pair sum on random states") {
  for (std::uint64_t k = 0; k < 50; ++k) {
    ParticleState st;
    double pos = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      pos += 2.0 + 5.0 * rng::uniform(rng::counter_hash(50, k, i));
      st.positions.push_back(pos);
    }
    double brute = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      double partial = 0.0;
      for (std::size_t j = i + 1; j < 5; ++j)
        partial += spec4().eval(st.positions[i] - st.positions[j], 0);
      brute += partial;
    }
    CHECK_EQ(hamiltonian(st, spec4()), brute);
  }
}

TEST_CASE("forces cancel in the sum and vanish at the minimum") {
  ParticleState pair;
  pair.positions = {0.0, 4.0};
  const auto f = grad_hamiltonian(pair, spec4());
  CHECK_EQ(f[0], 0.0);
  CHECK_EQ(f[1], 0.0);

  for (std::uint64_t k = 0; k < 1000; ++k) {
    ParticleState st;
    double pos = 0.0;
    const std::size_t n = 2 + rng::counter_hash(51, k, 0) % 31;
    for (std::size_t i = 0; i < n; ++i) {
      pos += 2.5 + 3.0 * rng::uniform(rng::counter_hash(51, k, 1 + i));
      st.positions.push_back(pos);
    }
    const auto g = grad_hamiltonian(st, spec4());
    double scale = 0.0;
    for (double v : g) scale = std::max(scale, std::fabs(v));
    CHECK_LE(std::fabs(sum_forces(g)),
             1e-12 * static_cast<double>(n) * std::max(1.0, scale));
  }
}

TEST_CASE("gradient matches finite differences of the energy") {
  for (std::uint64_t k = 0; k < 1000; ++k) {
    ParticleState st;
    double pos = 0.0;
    const std::size_t n = 2 + rng::counter_hash(52, k, 0) % 31;
    for (std::size_t i = 0; i < n; ++i) {
      pos += 3.0 + 2.0 * rng::uniform(rng::counter_hash(52, k, 1 + i));
      st.positions.push_back(pos);
    }
    const auto g = grad_hamiltonian(st, spec4());
    const double h = 1e-6;
    for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 4)) {
      auto plus = st, minus = st;
      plus.positions[i] += h;
      minus.positions[i] -= h;
      const double fd =
          (hamiltonian(plus, spec4()) - hamiltonian(minus, spec4())) / (2.0 * h);
      CHECK_LT(std::fabs(g[i] - fd) / std::max(1.0, std::fabs(fd)), 1e-6);
    }
  }
}

TEST_CASE("stable step formula") {
  auto p = make_scaling_params(0.1, 4.5, {1.0}, 1.2, 1.0, 0.8, 0.1);
  CHECK_EQ(p.total_particles(), 10);
  const double dt = stable_dt(p, 2.0);
  CHECK_EQ(dt, doctest::Approx(0.1 * std::pow(0.1, 4.5) / 40.0).epsilon(1e-12));
  CHECK_EQ(dt, doctest::Approx(7.9057e-8).epsilon(1e-4));
  auto p1 = make_scaling_params(0.1, 4.5, {1.0}, 1.2, 1.0, 0.8, 1.0);
  CHECK_EQ(stable_dt(p1, 2.0), doctest::Approx(10.0 * dt).epsilon(1e-12));
}

TEST_CASE("regime flags record the published constraints") {
  auto p = make_scaling_params(0.1, 4.5, {1.0}, 1.2, 1.0, 1.0);
  const auto f = p.regime_flags();
  CHECK(f.coagulation);        // alpha > 4, mu > 1/2
  CHECK_FALSE(f.tube);         // nu = 1 is not > 2
  CHECK_FALSE(f.relaxation);   // 4.5 > 2*1+3 = 5 is false
  auto q = make_scaling_params(0.1, 8.0, {1.0}, 2.6, 2.1, 1.0);
  CHECK(q.regime_flags().tube);
  CHECK(q.regime_flags().relaxation);
}

TEST_CASE("em_step preconditions and degenerate cases") {
  auto params = gentle();
  auto st = equal_chain(8);
  st.seed = 12;
  const double bound = max_step(params, spec4());
  CHECK_THROWS(em_step(st, 2.0 * bound, params, spec4()));

  auto before = st.positions;
  em_step_with_noise(st, 0.0, params, spec4(), {});
  CHECK_EQ(st.positions, before);  // dt = 0 with no noise is the identity

  // equal spacing is a fixed point of the drift
  std::vector<double> zero(st.positions.size(), 0.0);
  em_step_with_noise(st, bound, params, spec4(), zero);
  for (std::size_t i = 0; i < st.positions.size(); ++i)
    CHECK_EQ(st.positions[i], doctest::Approx(before[i]).epsilon(1e-14));
}

TEST_CASE("em steps self-converge at strong order one") {
  // Shared Brownian path at the finest resolution; coarser runs sum the
  // fine increments. The noise enters additively, so the scheme is strong
  // order one: the mean-square endpoint gap scales like dt^2 and halving
  // dt shrinks it by about four (the coherent-error limit against a dt/8
  // reference is (7/8)^2/(3/8)^2 = 5.4).
  auto params = gentle(4, 0.5, 2.0);
  params.dt_override = 1.0;  // step bound handled manually here
  const double dt0 = 0.002;
  const int n_fine = 64;  // dt0/8 steps per coarse step at the finest level
  double e1 = 0.0, e2 = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    // fine increments for 8 coarse steps of size dt0
    std::vector<std::vector<double>> fine(
        8 * 8, std::vector<double>(4));
    for (int step = 0; step < 64; ++step)
      for (int i = 0; i < 4; i += 2) {
        const auto p = rng::normal_pair(9000 + s, step, static_cast<std::uint64_t>(i / 2));
        fine[step][static_cast<std::size_t>(i)] = std::sqrt(dt0 / 8.0) * p.z0;
        fine[step][static_cast<std::size_t>(i) + 1] = std::sqrt(dt0 / 8.0) * p.z1;
      }
    auto run = [&](int aggregate) {
      ParticleState st = equal_chain(4);
      for (int step = 0; step * aggregate < 64; ++step) {
        std::vector<double> w(4, 0.0);
        for (int sub = 0; sub < aggregate; ++sub)
          for (std::size_t i = 0; i < 4; ++i)
            w[i] += fine[static_cast<std::size_t>(step * aggregate + sub)][i];
        em_step_with_noise(st, dt0 * aggregate / 8.0, params, spec4(), w);
      }
      return st.positions;
    };
    const auto ref = run(1);   // dt0/8
    const auto c1 = run(8);    // dt0
    const auto c2 = run(4);    // dt0/2
    double g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      g1 += (c1[i] - ref[i]) * (c1[i] - ref[i]);
      g2 += (c2[i] - ref[i]) * (c2[i] - ref[i]);
    }
    e1 += g1;
    e2 += g2;
  }
  (void)n_fine;
  const double ratio = e1 / e2;
  CHECK_GE(ratio, 3.0);
  CHECK_LE(ratio, 6.0);
}

TEST_CASE("simulate_micro basics") {
  auto params = gentle();
  ParticleState st = equal_chain(8);
  st.seed = 77;

  SUBCASE("zero horizon records only the initial sample") {
    const auto traj = simulate_micro(st, 0.0, 0.1, params, spec4());
    REQUIRE_EQ(traj.samples.size(), 1);
    CHECK_EQ(traj.samples[0].t_macro, 0.0);
    CHECK_EQ(traj.samples[0].n_segments, 1);
  }

  SUBCASE("fixed seed reruns are bit-identical") {
    const auto t1 = simulate_micro(st, 0.01, 0.002, params, spec4());
    const auto t2 = simulate_micro(st, 0.01, 0.002, params, spec4());
    REQUIRE_EQ(t1.samples.size(), t2.samples.size());
    for (std::size_t i = 0; i < t1.samples.size(); ++i) {
      CHECK_EQ(t1.samples[i].com, t2.samples[i].com);
      CHECK_EQ(t1.samples[i].energy, t2.samples[i].energy);
    }
  }

  SUBCASE("observer can stop the run") {
    int calls = 0;
    auto obs = [&](const ParticleState&, double) { return ++calls < 3; };
    const auto traj = simulate_micro(st, 0.01, 0.001, params, spec4(), obs);
    CHECK_EQ(traj.samples.size(), 3);
  }
}

TEST_CASE("noiseless simulate_micro tracks the gradient flow") {
  const auto spec = spec4();
  const auto constants = derive_constants(spec);
  const auto thresholds = derive_thresholds(spec, constants, 0.1);
  auto params = gentle(16, 0.5, 2.0);

  // start with all gaps inside D''
  ParticleState st;
  double pos = 0.0;
  st.positions.push_back(pos);
  for (std::size_t i = 0; i < 15; ++i) {
    pos += thresholds.b3p +
           (thresholds.b2p - thresholds.b3p) *
               rng::uniform(rng::counter_hash(60, i, 0));
    st.positions.push_back(pos);
  }

  const double t_macro_end = 0.5;  // micro horizon: eps^-3 * 0.5 = 4
  SimulateOptions opt;
  opt.with_noise = false;
  opt.record_snapshots = true;
  const auto traj = simulate_micro(st, t_macro_end, t_macro_end, params, spec,
                                   nullptr, opt);
  const auto flow = integrate_gradient_flow(st, t_macro_end * 8.0, params, spec);

  // the endpoint of the noiseless run equals the flow at the same time
  REQUIRE_EQ(traj.snapshots.size(), 2);
  const auto& end_positions = traj.snapshots.back();
  const auto& end_flow = flow.back();
  REQUIRE_EQ(end_flow.gaps.size(), end_positions.size() - 1);
  for (std::size_t i = 0; i + 1 < end_positions.size(); ++i)
    CHECK_LT(std::fabs((end_positions[i + 1] - end_positions[i]) - end_flow.gaps[i]),
             1e-8);
}

TEST_CASE("gradient flow: invariance, decay and maximum principle") {
  const auto spec = spec4();
  const auto constants = derive_constants(spec);
  const auto thresholds = derive_thresholds(spec, constants, 0.1);
  auto params = gentle(16, 0.5, 2.0);
  const double n = 16.0;
  const double rate = thresholds.c_star * params.inv_temperature() / (n * n);

  ParticleState st;
  double pos = 0.0;
  st.positions.push_back(pos);
  const double lo = thresholds.b3p, hi = thresholds.b2p;
  for (std::size_t i = 0; i < 15; ++i) {
    pos += lo + (hi - lo) * (0.04 + 0.92 * rng::uniform(rng::counter_hash(61, i, 0)));
    st.positions.push_back(pos);
  }

  const double t_end = 5.0 / rate;  // five decay e-folds
  const auto flow = integrate_gradient_flow(st, t_end, params, spec);

  auto sum_sq = [&](const GapFlowSample& s) {
    double v = 0.0;
    for (double g : s.gaps) v += (g - 4.0) * (g - 4.0);
    return v;
  };
  const double initial = sum_sq(flow.front());
  double prev_energy = flow.front().energy;
  // the running extremes include the boundary value a
  auto max_with_boundary = [](const GapFlowSample& s) {
    return std::max(4.0, *std::max_element(s.gaps.begin(), s.gaps.end()));
  };
  auto min_with_boundary = [](const GapFlowSample& s) {
    return std::min(4.0, *std::min_element(s.gaps.begin(), s.gaps.end()));
  };
  double prev_max = max_with_boundary(flow.front());
  double prev_min = min_with_boundary(flow.front());
  for (const auto& s : flow) {
    for (double g : s.gaps) {
      CHECK_GT(g, lo);
      CHECK_LE(g, hi + 1e-12);
    }
    CHECK_LE(sum_sq(s), std::exp(-rate * s.t_micro) * initial * (1.0 + 1e-9));
    CHECK_LE(s.energy, prev_energy + 1e-9);
    prev_energy = s.energy;
    const double mx = max_with_boundary(s);
    const double mn = min_with_boundary(s);
    CHECK_LE(mx, prev_max + 1e-12);
    CHECK_GE(mn, prev_min - 1e-12);
    prev_max = mx;
    prev_min = mn;
  }
  CHECK_LE(sum_sq(flow.back()), std::exp(-5.0) * initial);

  // an equal-spacing chain does not move
  const auto frozen = integrate_gradient_flow(equal_chain(8), 1.0, params, spec);
  for (double g : frozen.back().gaps) CHECK_EQ(g, doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("gap flow step agrees with the position-space flow") {
  auto params = gentle(4, 0.5, 2.0);
  ParticleState st;
  st.positions = {0.0, 4.2, 8.1, 12.4};
  std::vector<double> gaps = {4.2, 3.9, 4.3};
  const double dt = stable_dt(params, 2.0);

  auto from_positions = st;
  em_step_with_noise(from_positions, dt, params, spec4(), {});
  const auto next = gap_flow_step(gaps, dt, params, spec4());
  for (std::size_t i = 0; i + 1 < st.positions.size(); ++i) {
    const double g =
        from_positions.positions[i + 1] - from_positions.positions[i];
    CHECK_EQ(next[i], doctest::Approx(g).epsilon(1e-12));
  }

  SUBCASE("fixed point and preconditions") {
    const std::vector<double> lattice = {4.0, 4.0, 4.0};
    const auto still = gap_flow_step(lattice, dt, params, spec4());
    for (double g : still) CHECK_EQ(g, 4.0);
    CHECK_THROWS(gap_flow_step(std::vector<double>{4.0, -1.0}, dt, params, spec4()));
    CHECK_THROWS(gap_flow_step(lattice, 10.0, params, spec4()));
  }
}

TEST_CASE("a million steps at the conservative bound stay finite and in tube") {
  auto params = make_scaling_params(0.2, 4.5, {1.0}, 1.2, 1.0, 0.8);
  const auto spec = spec4();
  ParticleState st = build_initial(InitialKind::single, params, spec,
                                   GapMode::uniform, 314);
  const double dt = stable_dt(params, 2.0);
  const double t_macro_end = 1.0e6 * dt * std::pow(0.2, 3.0);
  const auto traj = simulate_micro(st, t_macro_end, t_macro_end, params, spec);
  REQUIRE_EQ(traj.samples.size(), 2);
  CHECK(std::isfinite(traj.samples.back().energy));
  CHECK(std::isfinite(traj.samples.back().com));
  CHECK_LT(traj.samples.back().grad_norm_inf, 0.2);  // eps^nu with nu = 1
}

TEST_CASE("gap flow step obeys the maximum principle with boundary a") {
  auto params = gentle(8, 0.5, 2.0);
  const double dt = stable_dt(params, 2.0);
  std::vector<double> gaps = {4.9, 3.6, 5.2, 3.4, 4.4, 3.9, 5.0};
  for (int step = 0; step < 2000; ++step) {
    const auto next = gap_flow_step(gaps, dt, params, spec4());
    const double mx0 = std::max(4.0, *std::max_element(gaps.begin(), gaps.end()));
    const double mn0 = std::min(4.0, *std::min_element(gaps.begin(), gaps.end()));
    const double mx1 = std::max(4.0, *std::max_element(next.begin(), next.end()));
    const double mn1 = std::min(4.0, *std::min_element(next.begin(), next.end()));
    CHECK_LE(mx1, mx0 + 1e-12);
    CHECK_GE(mn1, mn0 - 1e-12);
    gaps = next;
  }
  // after many steps the gaps have contracted toward the well distance
  for (double g : gaps) CHECK_LT(std::fabs(g - 4.0), 0.5);
}

TEST_CASE("centre of mass moves only by the injected noise") {
  auto params = gentle(8, 0.5, 2.0);
  ParticleState st = equal_chain(8);
  for (std::size_t i = 0; i < st.positions.size(); ++i)
    st.positions[i] += 0.05 * (rng::uniform(rng::counter_hash(62, i, 0)) - 0.5);
  std::sort(st.positions.begin(), st.positions.end());

  const double com0 = center_of_mass(st.positions);
  const double dt = stable_dt(params, 2.0);
  double noise_mean_total = 0.0;
  const std::size_t n = st.positions.size();
  for (std::uint64_t step = 0; step < 500; ++step) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
      w[i] = std::sqrt(dt) * rng::normal(9090, step, i);
    double m = 0.0;
    for (double v : w) m += v;
    noise_mean_total += m / static_cast<double>(n);
    em_step_with_noise(st, dt, params, spec4(), w);
  }
  const double drift_residual =
      center_of_mass(st.positions) - com0 - noise_mean_total;
  CHECK_LT(std::fabs(drift_residual), 1e-12 * static_cast<double>(n) * 500);
}

TEST_CASE("build_initial layouts") {
  const auto spec = spec4();

  SUBCASE("single chain, exact gaps") {
    auto params = make_scaling_params(0.5, 2.0, {2.5}, 1.2, 1.0, 0.8);
    const auto st = build_initial(InitialKind::single, params, spec,
                                  GapMode::exact, 1);
    const std::vector<double> expect = {0.0, 4.0, 8.0, 12.0, 16.0};
    CHECK_EQ(st.positions, expect);
  }

  SUBCASE("two chains touch at distance b") {
    auto params = make_scaling_params(0.5, 2.0, {1.5, 1.5}, 1.2, 1.0, 0.8);
    const auto st = build_initial(InitialKind::two_chain, params, spec,
                                  GapMode::exact, 1);
    const std::vector<double> expect = {0.0, 4.0, 8.0, 14.0, 18.0, 22.0};
    CHECK_EQ(st.positions, expect);
  }

  SUBCASE("uniform mode stays inside the prescribed fluctuation") {
    auto params = make_scaling_params(0.1, 4.5, {0.5, 0.5}, 0.6, 1.0, 0.8);
    const auto st = build_initial(InitialKind::two_chain, params, spec,
                                  GapMode::uniform, 99);
    const double fluct = std::pow(0.1, 0.6);
    const ChainGeometry geom{4.0, 6.0};
    const std::span<const double> x(st.positions);
    CHECK(is_chain(x.first(5), fluct * (1 + 1e-12), geom));
    CHECK(is_chain(x.subspan(5), fluct * (1 + 1e-12), geom));
    CHECK_EQ(st.positions[5] - st.positions[4], 6.0);  // inter-chain gap is b
  }

  SUBCASE("n-chain separations are macroscopic") {
    auto params = make_scaling_params(0.5, 2.0, {1.0, 1.0, 1.0}, 1.2, 1.0, 0.8);
    const std::vector<double> seps = {5.0, 3.5};  // macro; micro: 10 and 7
    const auto st = build_initial(InitialKind::n_chain, params, spec,
                                  GapMode::exact, 1, seps);
    REQUIRE_EQ(st.positions.size(), 6);
    CHECK_EQ(st.positions[2] - st.positions[1], 10.0);
    CHECK_EQ(st.positions[4] - st.positions[3], 7.0);
  }

  SUBCASE("fluctuation beyond the tube domain is rejected") {
    auto params = make_scaling_params(0.5, 2.0, {2.5}, 0.1, 1.0, 0.8);
    // eps^mu = 0.5^0.1 = 0.93... fine; push it over b - a = 2 via mu < 0
    params.mu = -2.0;  // eps^-2 = 4 > 2
    CHECK_THROWS(build_initial(InitialKind::single, params, spec,
                               GapMode::uniform, 1));
  }
}
