// Internal statistical toolbox: normal CDF/quantile, chi-square quantiles,
// Kolmogorov-Smirnov statistics, moment helpers. The acceptance suite must
// not lean on external statistics tooling, so everything lives here.

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace coagsim::stats {

double normal_cdf(double x);

// Inverse standard normal CDF (Acklam's rational approximation, |err|<1e-9),
// p in (0,1).
double normal_quantile(double p);

// Chi-square quantile via the Wilson-Hilferty cube approximation; adequate
// for wide confidence bands at k >> 1.
double chi_square_quantile(double p, double k);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);  // unbiased, n-1

// One-sample KS: sup |F_n - F| against a monotone CDF.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Two-sample KS: sup |F_n - G_m| over the pooled support.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace coagsim::stats
