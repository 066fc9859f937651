// Pair potential U(x) = psi((|x|-a)^2 - 4) with a degree-7 Hermite bridge
// smoothing function, the structural constants derived from it, and the
// machine checks of the model assumptions those constants must satisfy.

#pragma once

#include <array>
#include <string>
#include <vector>

namespace coagsim {

// psi(x) = x for x <= -1, psi(x) = 0 for x >= 0, and -q(-x) on (-1,0) where
// q is the unique degree-7 polynomial with q=q'=q''=q'''=0 at 0 and
// q=1, q'=1, q''=q'''=0 at 1. That makes psi nondecreasing and C^3.
struct PotentialSpec {
  double a = 0.0;                          // well distance, >= 4
  std::array<double, 8> bridge_coefficients{};  // q coefficients, degree 0..7

  double bridge(double t, int order) const {
    double s = 0.0;
    for (int k = 7; k >= order; --k) {
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
      s = s * t + f * bridge_coefficients[static_cast<std::size_t>(k)];
    }
    return s;
  }

  double psi(double v, int order) const {
    if (v <= -1.0) return order == 0 ? v : (order == 1 ? 1.0 : 0.0);
    if (v >= 0.0) return 0.0;
    const double d = bridge(-v, order);
    // psi(v) = -q(-v): odd orders pick up (-1)^(order+1)
    return (order % 2 == 0) ? -d : d;
  }

  // U and derivatives; order 0 -> energy, 1 -> slope, 2 -> curvature.
  // U is even, so order 1 carries the sign of x.
  double eval(double x, int order) const {
    const double r = x < 0.0 ? -x : x;
    const double u = r - a;
    const double v = u * u - 4.0;
    if (order == 0) return psi(v, 0);
    if (order == 1) {
      const double d = psi(v, 1) * 2.0 * u;
      return x < 0.0 ? -d : d;
    }
    return psi(v, 2) * 4.0 * u * u + 2.0 * psi(v, 1);
  }

  // Interaction range of the family: the bridge is strictly positive on
  // (0,1), so U vanishes identically at distance a + 2 and beyond.
  double range() const { return a + 2.0; }
};

// Throws std::invalid_argument for a < 4; validates the bridge numerically
// (monotone, C^3 at the knots).
PotentialSpec build_example_potential(double a);

struct PotentialConstants {
  double a = 0.0;
  double u_a = 0.0;      // U(a), the well depth
  double b = 0.0;        // interaction range
  double b1 = 0.0, b2 = 0.0;  // convex component D = (b1, b2) around a
  double b3 = 0.0, b4 = 0.0;  // depth-matching points, U(b2)+U(b3)=U(a), U(b4)=U(b3)
  double c_check = 0.0;  // U''(a)
  double c_minus = 0.0;  // quadratic lower-bound constant on D
};

// Root-finds every structural constant; tol in (0, 1e-6]. Throws
// std::runtime_error when a bracketing interval shows no sign change.
PotentialConstants derive_constants(const PotentialSpec& spec, double tol = 1e-10);

struct AssumptionClause {
  std::string name;
  bool pass = false;
  double witness = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionClause> clauses;
  bool all_pass() const;
  const AssumptionClause* find(const std::string& name) const;
};

// Checks the seven structural clauses (symmetry, C^3 finite range, unique
// nondegenerate minimum, range < 2a, deep well, monotone tail, well offset)
// on a grid of the given step over [0, b+1]. Failures are report entries.
AssumptionReport verify_assumptions(const PotentialSpec& spec,
                                    const PotentialConstants& constants,
                                    double grid_step = 1e-3);

struct ThresholdSet {
  double b2p = 0.0, b3p = 0.0, b4p = 0.0;  // shrunk interval endpoints
  double delta_bar = 0.0;  // energy barrier U(b2p)+U(b3p)-U(a) > 0
  double delta1 = 0.0;     // fixed at delta_bar / 2
  double c_star = 0.0;     // inf U'' over D'' = (b3p, b2p]
  double kappa = 0.0;      // in (1/2, 1)
  double theta = 0.0;      // > 0, divergence exponent
};

// b3p = b3 - margin*(b3-b1) (clipped so 2*b3p > b); b2p placed by bisection
// so the energy lost on the b2 side is margin * (U(b3p)-U(b3)), which makes
// delta_bar = (1-margin)*(U(b3p)-U(b3)) positive for every margin in (0,1).
// Throws std::runtime_error when the construction degenerates.
ThresholdSet derive_thresholds(const PotentialSpec& spec,
                               const PotentialConstants& constants,
                               double margin, double kappa = 0.75,
                               double theta = 1.0);

}  // namespace coagsim
