// coagsim command-line interface: potential inspection, single micro/macro
// simulations, assumption verification and the experiment harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "coagsim/config.hpp"
#include "coagsim/csv.hpp"
#include "coagsim/diagnostics.hpp"
#include "coagsim/experiments.hpp"
#include "coagsim/macroprocess.hpp"
#include "coagsim/microsim.hpp"
#include "coagsim/potential.hpp"
#include "coagsim/rng.hpp"

namespace {

namespace fs = std::filesystem;
using namespace coagsim;

void print_kv(const std::string& key, double value) {
  std::printf("%s = %s\n", key.c_str(), csv::fmt(value).c_str());
}

int cmd_potential_info(double a, double margin, double kappa, double theta) {
  const PotentialSpec spec = build_example_potential(a);
  const PotentialConstants k = derive_constants(spec);
  const ThresholdSet t = derive_thresholds(spec, k, margin, kappa, theta);
  print_kv("a", k.a);
  print_kv("u_a", k.u_a);
  print_kv("b", k.b);
  print_kv("b1", k.b1);
  print_kv("b2", k.b2);
  print_kv("b3", k.b3);
  print_kv("b4", k.b4);
  print_kv("c_check", k.c_check);
  print_kv("c_minus", k.c_minus);
  print_kv("b2p", t.b2p);
  print_kv("b3p", t.b3p);
  print_kv("b4p", t.b4p);
  print_kv("delta_bar", t.delta_bar);
  print_kv("delta1", t.delta1);
  print_kv("c_star", t.c_star);
  const AssumptionReport rep = verify_assumptions(spec, k);
  for (const auto& clause : rep.clauses)
    std::printf("%s = %s\n", clause.name.c_str(), clause.pass ? "pass" : "fail");
  return rep.all_pass() ? 0 : 1;
}

int cmd_verify(double a, double margin, double kappa, double theta) {
  const PotentialSpec spec = build_example_potential(a);
  const PotentialConstants k = derive_constants(spec);
  const AssumptionReport rep = verify_assumptions(spec, k);
  for (const auto& clause : rep.clauses)
    std::printf("%s = %s (witness %s)\n", clause.name.c_str(),
                clause.pass ? "pass" : "fail", csv::fmt(clause.witness).c_str());
  bool thresholds_ok = true;
  try {
    const ThresholdSet t = derive_thresholds(spec, k, margin, kappa, theta);
    const bool order = k.b1 < t.b3p && t.b3p < k.b3 && k.b3 < a && a < k.b4 &&
                       k.b4 < t.b4p && t.b4p < t.b2p && t.b2p < k.b2 &&
                       2.0 * t.b3p > k.b;
    std::printf("threshold_order = %s\n", order ? "pass" : "fail");
    std::printf("delta_bar_positive = %s\n", t.delta_bar > 0.0 ? "pass" : "fail");
    std::printf("c_star_positive = %s\n", t.c_star > 0.0 ? "pass" : "fail");
    thresholds_ok = order && t.delta_bar > 0.0 && t.c_star > 0.0;
  } catch (const std::exception& e) {
    std::printf("thresholds = fail (%s)\n", e.what());
    thresholds_ok = false;
  }
  return (rep.all_pass() && thresholds_ok) ? 0 : 1;
}

int cmd_simulate_micro(const std::string& config_path, const std::string& out) {
  const ExperimentConfig cfg = parse_config(config_path);
  const PotentialSpec spec = build_example_potential(cfg.a);
  const PotentialConstants k = derive_constants(spec);
  const ThresholdSet thresholds =
      derive_thresholds(spec, k, cfg.margin, cfg.kappa, cfg.theta);
  const ScalingParams params = scaling_params_for(cfg, cfg.epsilon);

  const InitialKind kind = cfg.rho.size() == 1 ? InitialKind::single
                           : cfg.rho.size() == 2 ? InitialKind::two_chain
                                                 : InitialKind::n_chain;
  const std::uint64_t seed = rng::replica_seed(cfg.master_seed, 0);
  ParticleState init = build_initial(kind, params, spec, GapMode::uniform, seed);

  StopObserver obs;
  obs.geom = {spec.a, spec.range()};
  obs.thresholds = thresholds;
  obs.epsilon = cfg.epsilon;
  obs.nu = cfg.nu;
  obs.nu_tilde = cfg.nu_tilde;
  obs.enable_sigma = true;
  obs.enable_tau = true;
  if (cfg.rho.size() == 2) {
    obs.enable_two_chain = true;
    obs.n1 = static_cast<std::size_t>(params.n_particles_list[0]);
    ParticleState saddle = build_initial(kind, params, spec, GapMode::exact, seed);
    obs.saddle_ref = hamiltonian(saddle, spec);
  }
  auto observer = [&](const ParticleState& st, double t) {
    obs.observe(st.positions, t, spec);
    return true;
  };

  SimulateOptions options;
  options.record_snapshots = true;
  const Trajectory traj = simulate_micro(init, cfg.t_macro_end, cfg.sample_every,
                                         params, spec, observer, options);

  fs::create_directories(out);
  {
    csv::Writer w((fs::path(out) / "trajectory.csv").string());
    w.header({"t_macro", "com", "energy", "grad_norm_inf", "n_segments"});
    for (const auto& s : traj.samples)
      w.line({csv::fmt(s.t_macro), csv::fmt(s.com), csv::fmt(s.energy),
              csv::fmt(s.grad_norm_inf), std::to_string(s.n_segments)});
  }
  {
    std::ofstream snap(fs::path(out) / "snapshots.txt");
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      snap << csv::fmt(traj.snapshot_times[i]);
      for (double x : traj.snapshots[i]) snap << ' ' << csv::fmt(x);
      snap << '\n';
    }
  }
  {
    csv::Writer w((fs::path(out) / "stopping.csv").string());
    w.header({"run_id", "seed", "tau1", "tau2", "tau3", "tau4", "tau5", "sigma",
              "tau"});
    const auto& r = obs.record;
    w.line({"0", std::to_string(seed), csv::fmt(r.tau1), csv::fmt(r.tau2),
            csv::fmt(r.tau3), csv::fmt(r.tau4), csv::fmt(r.tau5),
            csv::fmt(r.sigma), csv::fmt(r.tau)});
  }
  std::printf("wrote %zu samples to %s\n", traj.samples.size(), out.c_str());
  return 0;
}

int cmd_simulate_macro(const std::string& config_path, const std::string& out) {
  const ExperimentConfig cfg = parse_config(config_path);
  // Adjacent rods start with a fixed macroscopic edge gap of a/4.
  const double edge_gap = 0.25 * cfg.a;
  std::vector<double> centers;
  double left_edge = 0.0;
  for (std::size_t l = 0; l < cfg.rho.size(); ++l) {
    const double len = cfg.a * cfg.rho[l];
    if (l > 0) left_edge += edge_gap;
    centers.push_back(left_edge + 0.5 * len);
    left_edge += len;
  }
  RodSystem sys = init_rods(cfg.rho, centers, cfg.a, cfg.master_seed);
  const double dt =
      cfg.dt_override ? *cfg.dt_override : cfg.sample_every / 16.0;
  const std::uint64_t stride = static_cast<std::uint64_t>(
      std::max(1.0, std::round(cfg.sample_every / dt)));
  const RodTrajectory traj = simulate_rods(sys, cfg.t_macro_end, dt, stride);

  fs::create_directories(out);
  {
    csv::Writer w((fs::path(out) / "rods.csv").string());
    std::vector<std::string> header = {"t_macro"};
    for (std::size_t r = 0; r < cfg.rho.size(); ++r)
      header.push_back("eta_tilde_" + std::to_string(r));
    w.header(header);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      std::vector<std::string> row = {csv::fmt(traj.times[i])};
      for (double v : traj.eta_tilde_by_rod[i]) row.push_back(csv::fmt(v));
      w.line(row);
    }
  }
  {
    csv::Writer w((fs::path(out) / "events.csv").string());
    w.header({"t_macro", "left_members", "right_members", "new_mass"});
    for (const auto& ev : traj.events) {
      auto join = [](const std::vector<std::size_t>& ms) {
        std::string s;
        for (std::size_t i = 0; i < ms.size(); ++i)
          s += (i ? "+" : "") + std::to_string(ms[i]);
        return s;
      };
      w.line({csv::fmt(ev.t_macro), join(ev.left_members), join(ev.right_members),
              csv::fmt(ev.new_mass)});
    }
  }
  std::printf("wrote %zu samples, %zu events to %s\n", traj.times.size(),
              traj.events.size(), out.c_str());
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out) {
  const ExperimentConfig cfg = parse_config(config_path);
  const StatReport rep = run_experiment(cfg, out);
  std::fputs(rep.to_text().c_str(), stdout);
  return rep.passed() ? 0 : (rep.result == "inconclusive" ? 2 : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coagsim: interacting Brownian particles at vanishing "
               "temperature and their coalescing-rod limit"};
  app.require_subcommand(1);

  double a = 4.0, margin = 0.1, kappa = 0.75, theta = 1.0;
  std::string config_path, out_dir = "out";

  auto* info = app.add_subcommand("potential-info",
                                  "print derived constants and assumption report");
  info->add_option("--a", a, "well distance (>= 4)");
  info->add_option("--margin", margin, "threshold margin in (0,1)");
  info->add_option("--kappa", kappa, "centre-difference exponent in (1/2,1)");
  info->add_option("--theta", theta, "divergence exponent (> 0)");

  auto* verify = app.add_subcommand("verify",
                                    "machine-check the structural assumptions");
  verify->add_option("--a", a, "well distance (>= 4)");
  verify->add_option("--margin", margin, "threshold margin in (0,1)");
  verify->add_option("--kappa", kappa, "centre-difference exponent in (1/2,1)");
  verify->add_option("--theta", theta, "divergence exponent (> 0)");

  auto* micro = app.add_subcommand("simulate-micro", "run one micro trajectory");
  micro->add_option("--config", config_path, "config file")->required();
  micro->add_option("--out", out_dir, "output directory");

  auto* macro = app.add_subcommand("simulate-macro", "run one rod trajectory");
  macro->add_option("--config", config_path, "config file")->required();
  macro->add_option("--out", out_dir, "output directory");

  auto* exp = app.add_subcommand("experiment", "run a statistical experiment");
  exp->add_option("--config", config_path, "config file")->required();
  exp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (info->parsed()) return cmd_potential_info(a, margin, kappa, theta);
    if (verify->parsed()) return cmd_verify(a, margin, kappa, theta);
    if (micro->parsed()) return cmd_simulate_micro(config_path, out_dir);
    if (macro->parsed()) return cmd_simulate_macro(config_path, out_dir);
    if (exp->parsed()) return cmd_experiment(config_path, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
