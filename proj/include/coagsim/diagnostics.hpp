// Chain decomposition, the three fluctuation norms, tube membership,
// relative energy, segment tracking and online stopping-time detection.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coagsim/potential.hpp"

namespace coagsim {

struct ChainDecomposition {
  double eta = 0.0;            // centre of mass
  std::vector<double> h;       // fluctuation vector, sums to zero
  double grad_norm_2 = 0.0;    // sqrt(sum (h_{i+1}-h_i)^2)
  double grad_norm_inf = 0.0;  // max |h_{i+1}-h_i| = max |gap_i - a|
  double laplace_norm_2 = 0.0; // discrete Laplacian norm with boundary terms
};

double center_of_mass(std::span<const double> x);

// x = z0 + h + eta with z0 the centred equal-spacing configuration
// (z0_N = -z0_1 = a(N-1)/2). Requires N >= 2 and sorted x.
ChainDecomposition decompose(std::span<const double> x, double a);

// Norms of an arbitrary vector h (used by the sandwich-inequality tests).
double grad_norm_2(std::span<const double> h);
double grad_norm_inf(std::span<const double> h);
double laplace_norm_2(std::span<const double> h);

// Geometry context for tube membership: c must lie in [0, b-a].
struct ChainGeometry {
  double a = 0.0;
  double b = 0.0;
};

bool is_chain(std::span<const double> x, double c, const ChainGeometry& geom);

// H(x) - saddle_ref, where saddle_ref is the Hamiltonian of the two-chain
// saddle configuration for the run at hand.
double relative_energy(std::span<const double> x, const PotentialSpec& spec,
                       double saddle_ref);

// Sum form of the relative energy valid while only neighbours interact:
// sum_{i != n1} (U(gap_i) - U(a)) + U(gap_{n1}), gaps 1-based, n1 = N1.
double relative_energy_neighbor_form(std::span<const double> x,
                                     const PotentialSpec& spec, std::size_t n1,
                                     double u_a);

struct CentersDifference {
  double direct = 0.0;     // eta(right chain) - eta(left chain)
  double gap_weighted = 0.0;  // inter-gap + weighted gap sums, same quantity
};

// Both evaluation routes for the difference of the two chains' centres of
// mass; x sorted, 1 <= n1 < N.
CentersDifference centers_difference(std::span<const double> x, std::size_t n1);

struct Segment {
  std::size_t first = 0;  // index range [first, last] inclusive
  std::size_t last = 0;
  double eta = 0.0;
  std::size_t count = 0;
};

struct SegmentView {
  std::vector<Segment> segments;
};

// Maximal runs whose internal gaps are < gap_threshold.
SegmentView segment_view(std::span<const double> x, double gap_threshold);

// First-hit macroscopic times; negative means "not yet".
struct StoppingRecord {
  double tau1 = -1.0, tau2 = -1.0, tau3 = -1.0, tau4 = -1.0, tau5 = -1.0;
  double sigma = -1.0, tau = -1.0;
  // index or value that triggered each hit, for reporting
  double tau1_witness = 0.0, tau2_witness = 0.0, tau3_witness = 0.0,
         tau4_witness = 0.0, tau5_witness = 0.0, sigma_witness = 0.0,
         tau_witness = 0.0;
};

// Per-run stopping-time detector; detection is at sample resolution.
struct StopObserver {
  ChainGeometry geom;
  ThresholdSet thresholds;
  double epsilon = 0.0;
  double nu = 0.0;        // tube exponent for sigma
  double nu_tilde = 0.0;  // target tube exponent for tau
  std::size_t n1 = 0;     // left-chain size; 0 disables two-chain detectors
  double saddle_ref = 0.0;
  bool enable_sigma = false;
  bool enable_tau = false;
  bool enable_two_chain = false;  // tau1..tau4
  // paired noiseless positions for tau5; empty disables it
  std::vector<double> reference_positions;

  StoppingRecord record;

  // Tests every untriggered stopping-time predicate on this sample.
  void observe(std::span<const double> x, double t_macro,
               const PotentialSpec& spec);
};

}  // namespace coagsim
