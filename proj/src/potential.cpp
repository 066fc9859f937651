#include "coagsim/potential.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace coagsim {

namespace {

// Bisection on f over [lo, hi]; requires a sign change. `what` names the
// constant being solved for in the error message.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, const char* what) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw std::runtime_error(std::string("derive: no sign change bracketing ") + what);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PotentialSpec build_example_potential(double a) {
  if (!(a >= 4.0)) throw std::invalid_argument("build_example_potential: a must be >= 4");
  PotentialSpec spec;
  spec.a = a;
  // Solution of the 8 endpoint conditions: q(t) = 20t^4 - 45t^5 + 36t^6 - 10t^7.
  spec.bridge_coefficients = {0.0, 0.0, 0.0, 0.0, 20.0, -45.0, 36.0, -10.0};

  // Numeric validation of the required bridge shape.
  for (int i = 0; i <= 3000; ++i) {
    const double v = -1.5 + 2.0 * static_cast<double>(i) / 3000.0;
    if (spec.psi(v, 1) < -1e-12)
      throw std::runtime_error("bridge polynomial is not nondecreasing");
  }
  for (double v0 : {-1.0, 0.0}) {  // C^3 at the knots, by one-sided limits
    for (int order = 0; order <= 2; ++order) {
      const double below = spec.psi(v0 - 1e-9, order);
      const double above = spec.psi(v0 + 1e-9, order);
      if (std::fabs(below - above) > 1e-6)
        throw std::runtime_error("bridge polynomial is not C^3 at a knot");
    }
  }
  return spec;
}

PotentialConstants derive_constants(const PotentialSpec& spec, double tol) {
  if (!(tol > 0.0 && tol <= 1e-6))
    throw std::invalid_argument("derive_constants: tol must be in (0, 1e-6]");
  const double a = spec.a;
  PotentialConstants k;
  k.a = a;
  k.u_a = spec.eval(a, 0);
  k.c_check = spec.eval(a, 2);

  const double scan = 1e-3;

  // b: outward scan from a for the first grid point with U identically zero
  // beyond it, then bisection on the support boundary.
  {
    double x = a;
    while (spec.eval(x, 0) != 0.0) {
      x += scan;
      if (x > a + 16.0) throw std::runtime_error("derive: potential support unbounded?");
    }
    k.b = bisect([&](double y) { return spec.eval(y, 0) == 0.0 ? 1.0 : -1.0; },
                 x - scan, x, tol, "b (support edge)");
  }

  // D = (b1, b2): the convex component around a, by U'' sign changes.
  {
    double hi = a;
    while (spec.eval(hi, 2) > 0.0) hi += scan;
    k.b2 = bisect([&](double y) { return spec.eval(y, 2); }, hi - scan, hi, tol, "b2");
    double lo = a;
    while (spec.eval(lo, 2) > 0.0) {
      lo -= scan;
      if (lo < 0.0) throw std::runtime_error("derive: convex component reaches 0");
    }
    k.b1 = bisect([&](double y) { return spec.eval(y, 2); }, lo, lo + scan, tol, "b1");
  }

  const double ub2 = spec.eval(k.b2, 0);
  k.b3 = bisect([&](double y) { return ub2 + spec.eval(y, 0) - k.u_a; }, k.b1, a,
                tol, "b3");
  const double ub3 = spec.eval(k.b3, 0);
  k.b4 = bisect([&](double y) { return spec.eval(y, 0) - ub3; }, a, k.b2, tol, "b4");

  // Quadratic lower-bound constant on D, grid minimum at step 1e-4.
  {
    double cmin = std::numeric_limits<double>::infinity();
    const double step = 1e-4;
    for (double g = k.b1 + step; g < k.b2; g += step) {
      const double d = g - a;
      if (std::fabs(d) < 0.5 * step) continue;
      cmin = std::min(cmin, (spec.eval(g, 0) - k.u_a) / (d * d));
    }
    k.c_minus = cmin;
  }
  return k;
}

bool AssumptionReport::all_pass() const {
  for (const auto& c : clauses)
    if (!c.pass) return false;
  return true;
}

const AssumptionClause* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport verify_assumptions(const PotentialSpec& spec,
                                    const PotentialConstants& k,
                                    double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1e-3))
    throw std::invalid_argument("verify_assumptions: grid_step must be <= 1e-3");
  AssumptionReport rep;
  const double hi = k.b + 1.0;

  {  // symmetry: U(x) = U(-x) exactly on the grid
    double worst = 0.0;
    for (double x = 0.0; x <= hi; x += grid_step)
      worst = std::max(worst, std::fabs(spec.eval(x, 0) - spec.eval(-x, 0)));
    rep.clauses.push_back({"symmetry", worst == 0.0, worst, "max |U(x)-U(-x)|"});
  }
  {  // smoothness + finite range: FD match of U', U'' and zero tail
    double worst = 0.0;
    const double h = 1e-5;
    for (double x = grid_step; x <= hi; x += grid_step) {
      const double d1 = (spec.eval(x + h, 0) - spec.eval(x - h, 0)) / (2.0 * h);
      const double d2 =
          (spec.eval(x + h, 0) - 2.0 * spec.eval(x, 0) + spec.eval(x - h, 0)) / (h * h);
      worst = std::max(worst, std::fabs(d1 - spec.eval(x, 1)));
      worst = std::max(worst, std::fabs(d2 - spec.eval(x, 2)) * 1e-3);
    }
    double tail = 0.0;
    for (double x = k.b + grid_step; x <= k.b + 4.0; x += grid_step)
      for (int order = 0; order <= 2; ++order)
        tail = std::max(tail, std::fabs(spec.eval(x, order)));
    const bool ok = worst < 1e-3 && tail == 0.0;
    rep.clauses.push_back({"smoothness_finite_range", ok, worst,
                           "max FD mismatch; tail must vanish"});
  }
  {  // unique nondegenerate minimum at a with positive curvature
    double xmin = 0.0, umin = std::numeric_limits<double>::infinity();
    for (double x = 0.0; x <= hi; x += grid_step) {
      const double u = spec.eval(x, 0);
      if (u < umin) {
        umin = u;
        xmin = x;
      }
    }
    const bool ok = std::fabs(xmin - k.a) <= 2.0 * grid_step &&
                    std::fabs(umin - k.u_a) <= 1e-9 && k.c_check > 0.0;
    rep.clauses.push_back({"unique_minimum", ok, xmin, "grid argmin of U"});
  }
  rep.clauses.push_back({"short_range", k.b < 2.0 * k.a, k.b, "b < 2a"});
  {  // deep well: 2U(b2) > U(a) and U(b1)+U(b2) > U(a)
    const double ub1 = spec.eval(k.b1, 0), ub2 = spec.eval(k.b2, 0);
    const bool ok = 2.0 * ub2 > k.u_a && ub1 + ub2 > k.u_a;
    rep.clauses.push_back({"deep_well", ok, 2.0 * ub2 - k.u_a, "2U(b2)-U(a)"});
  }
  {  // monotone tail: U' >= 0 on [b2, b+1]
    double worst = std::numeric_limits<double>::infinity();
    for (double x = k.b2; x <= hi; x += grid_step)
      worst = std::min(worst, spec.eval(x, 1));
    rep.clauses.push_back({"tail_monotone", worst >= 0.0, worst, "min U' on [b2,b+1]"});
  }
  {  // well offset: b3 well defined (depth identity holds) and 2*b3 > b
    const double resid = spec.eval(k.b2, 0) + spec.eval(k.b3, 0) - k.u_a;
    const bool ok = std::fabs(resid) <= 1e-6 && 2.0 * k.b3 > k.b && k.b1 < k.b3 &&
                    k.b3 < k.a;
    rep.clauses.push_back({"well_offset", ok, 2.0 * k.b3 - k.b, "2*b3 - b"});
  }
  return rep;
}

ThresholdSet derive_thresholds(const PotentialSpec& spec,
                               const PotentialConstants& k, double margin,
                               double kappa, double theta) {
  if (!(margin > 0.0 && margin < 1.0))
    throw std::invalid_argument("derive_thresholds: margin must be in (0,1)");
  if (!(kappa > 0.5 && kappa < 1.0))
    throw std::invalid_argument("derive_thresholds: kappa must be in (1/2,1)");
  if (!(theta > 0.0)) throw std::invalid_argument("derive_thresholds: theta must be > 0");

  const double tol = 1e-12;
  ThresholdSet t;
  t.kappa = kappa;
  t.theta = theta;

  double b3p = k.b3 - margin * (k.b3 - k.b1);
  if (2.0 * b3p <= k.b)  // clip to keep second neighbours out of range
    b3p = 0.5 * k.b + 1e-6 * (k.b3 - 0.5 * k.b);
  if (!(b3p > k.b1 && b3p < k.b3))
    throw std::runtime_error("derive_thresholds: margin too large, b3p leaves (b1, b3)");
  t.b3p = b3p;

  const double gain = spec.eval(b3p, 0) - spec.eval(k.b3, 0);
  if (!(gain > 0.0))
    throw std::runtime_error("derive_thresholds: no energy gain on the b3 side");

  // Place b2p so the b2-side loss consumes only margin * gain of the barrier.
  const double target = spec.eval(k.b2, 0) - margin * gain;
  if (!(target > spec.eval(k.b4, 0)))
    throw std::runtime_error("derive_thresholds: margin too large, b2p hits b4");
  t.b2p = bisect([&](double y) { return spec.eval(y, 0) - target; }, k.b4, k.b2, tol,
                 "b2p");

  if (!(spec.eval(t.b2p, 0) > spec.eval(b3p, 0)))
    throw std::runtime_error("derive_thresholds: margin too large, D' collapses");
  t.b4p = bisect([&](double y) { return spec.eval(y, 0) - spec.eval(b3p, 0); }, k.b4,
                 t.b2p, tol, "b4p");

  t.delta_bar = spec.eval(t.b2p, 0) + spec.eval(t.b3p, 0) - k.u_a;
  if (!(t.delta_bar > 0.0))
    throw std::runtime_error("derive_thresholds: margin too large, delta_bar <= 0");
  t.delta1 = 0.5 * t.delta_bar;

  {  // curvature floor over D'' = (b3p, b2p]
    double cmin = std::numeric_limits<double>::infinity();
    const double step = 1e-4;
    for (double g = t.b3p + step; g < t.b2p; g += step)
      cmin = std::min(cmin, spec.eval(g, 2));
    cmin = std::min(cmin, spec.eval(t.b2p, 2));
    if (!(cmin > 0.0))
      throw std::runtime_error("derive_thresholds: curvature floor not positive on D''");
    t.c_star = cmin;
  }
  return t;
}

}  // namespace coagsim
