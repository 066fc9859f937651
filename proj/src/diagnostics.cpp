#include "coagsim/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include "coagsim/kernels.hpp"

namespace coagsim {

double center_of_mass(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("center_of_mass: empty configuration");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double grad_norm_2(std::span<const double> h) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    const double d = h[i + 1] - h[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double grad_norm_inf(std::span<const double> h) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < h.size(); ++i)
    m = std::max(m, std::fabs(h[i + 1] - h[i]));
  return m;
}

double laplace_norm_2(std::span<const double> h) {
  const std::size_t n = h.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d = 2.0 * h[i] - h[i + 1] - h[i - 1];
    s += d * d;
  }
  const double left = h[1] - h[0];
  const double right = h[n - 1] - h[n - 2];
  s += left * left + right * right;
  return std::sqrt(s);
}

ChainDecomposition decompose(std::span<const double> x, double a) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("decompose: need at least two particles");
  ChainDecomposition d;
  d.eta = center_of_mass(x);
  d.h.resize(n);
  const double half = a * static_cast<double>(n - 1) / 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = a * static_cast<double>(i) - half;
    d.h[i] = x[i] - z0 - d.eta;
  }
  d.grad_norm_2 = grad_norm_2(d.h);
  d.grad_norm_inf = grad_norm_inf(d.h);
  d.laplace_norm_2 = laplace_norm_2(d.h);
  return d;
}

bool is_chain(std::span<const double> x, double c, const ChainGeometry& geom) {
  if (!(c >= 0.0 && c <= geom.b - geom.a))
    throw std::invalid_argument("is_chain: c outside [0, b-a]");
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (std::fabs(x[i + 1] - x[i] - geom.a) > c) return false;
  return true;
}

double relative_energy(std::span<const double> x, const PotentialSpec& spec,
                       double saddle_ref) {
  return kernels::pair_energy(x, spec, spec.range(), kernels::Exec::serial) -
         saddle_ref;
}

double relative_energy_neighbor_form(std::span<const double> x,
                                     const PotentialSpec& spec, std::size_t n1,
                                     double u_a) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double ug = spec.eval(x[i + 1] - x[i], 0);
    s += (i + 1 == n1) ? ug : (ug - u_a);
  }
  return s;
}

CentersDifference centers_difference(std::span<const double> x, std::size_t n1) {
  const std::size_t n = x.size();
  if (!(n1 >= 1 && n1 < n))
    throw std::invalid_argument("centers_difference: n1 outside [1, N)");
  CentersDifference out;
  out.direct = center_of_mass(x.subspan(n1)) - center_of_mass(x.first(n1));

  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(n - n1);
  double s = x[n1] - x[n1 - 1];  // inter-chain gap
  for (std::size_t i = 1; i < n1; ++i)
    s += static_cast<double>(i) / n1d * (x[i] - x[i - 1]);
  for (std::size_t i = n1 + 1; i < n; ++i)
    s += static_cast<double>(n - i) / n2d * (x[i] - x[i - 1]);
  out.gap_weighted = s;
  return out;
}

SegmentView segment_view(std::span<const double> x, double gap_threshold) {
  SegmentView view;
  if (x.empty()) return view;
  std::size_t first = 0;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    if (i == x.size() || x[i] - x[i - 1] >= gap_threshold) {
      Segment seg;
      seg.first = first;
      seg.last = i - 1;
      seg.count = i - first;
      seg.eta = center_of_mass(x.subspan(first, seg.count));
      view.segments.push_back(seg);
      first = i;
    }
  }
  return view;
}

void StopObserver::observe(std::span<const double> x, double t_macro,
                           const PotentialSpec& spec) {
  const std::size_t n = x.size();
  if (n < 2) return;

  if (enable_two_chain && n1 >= 1 && n1 < n) {
    if (record.tau1 < 0.0) {
      const double inter = x[n1] - x[n1 - 1];
      if (inter <= thresholds.b2p) {
        record.tau1 = t_macro;
        record.tau1_witness = inter;
      }
    }
    if (record.tau2 < 0.0) {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i + 1 == n1) continue;
        const double g = x[i + 1] - x[i];
        if (!(g > thresholds.b3p && g < thresholds.b4p)) {
          record.tau2 = t_macro;
          record.tau2_witness = g;
          break;
        }
      }
    }
    if (record.tau3 < 0.0) {
      const double ht = relative_energy(x, spec, saddle_ref);
      if (ht >= thresholds.delta1) {
        record.tau3 = t_macro;
        record.tau3_witness = ht;
      }
    }
    if (record.tau4 < 0.0) {
      const double diff = centers_difference(x, n1).direct;
      const double target = 0.5 * spec.a * static_cast<double>(n) -
                            std::pow(static_cast<double>(n), thresholds.kappa);
      if (diff <= target) {
        record.tau4 = t_macro;
        record.tau4_witness = diff;
      }
    }
  }

  if (!reference_positions.empty() && record.tau5 < 0.0 &&
      reference_positions.size() == n) {
    double dev = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      dev = std::max(dev, std::fabs(x[i] - reference_positions[i]));
    if (dev >= std::pow(epsilon, thresholds.theta)) {
      record.tau5 = t_macro;
      record.tau5_witness = dev;
    }
  }

  if (enable_sigma || enable_tau) {
    double gmax = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      gmax = std::max(gmax, std::fabs(x[i + 1] - x[i] - geom.a));
    if (enable_sigma && record.sigma < 0.0 && gmax > std::pow(epsilon, nu)) {
      record.sigma = t_macro;
      record.sigma_witness = gmax;
    }
    // tau is the first entry time into the target tube, at positive time
    if (enable_tau && record.tau < 0.0 && t_macro > 0.0 &&
        gmax <= std::pow(epsilon, nu_tilde)) {
      record.tau = t_macro;
      record.tau_witness = gmax;
    }
  }
}

}  // namespace coagsim
