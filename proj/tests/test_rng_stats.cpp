#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "coagsim/rng.hpp"
#include "coagsim/stats.hpp"

using namespace coagsim;

TEST_CASE("counter rng is a pure function of its triple") {
  CHECK_EQ(rng::counter_hash(1, 2, 3), rng::counter_hash(1, 2, 3));
  CHECK_NE(rng::counter_hash(1, 2, 3), rng::counter_hash(1, 2, 4));
  CHECK_NE(rng::counter_hash(1, 2, 3), rng::counter_hash(1, 3, 3));
  CHECK_NE(rng::counter_hash(1, 2, 3), rng::counter_hash(2, 2, 3));
  const auto p = rng::normal_pair(42, 7, 0);
  const auto q = rng::normal_pair(42, 7, 0);
  CHECK_EQ(p.z0, q.z0);
  CHECK_EQ(p.z1, q.z1);
}

TEST_CASE("uniforms live in their half-open ranges") {
  for (std::uint64_t k = 0; k < 20000; ++k) {
    const double u = rng::uniform(rng::counter_hash(9, k, 0));
    CHECK_GE(u, 0.0);
    CHECK_LT(u, 1.0);
    const double v = rng::uniform_open0(rng::counter_hash(9, k, 1));
    CHECK_GT(v, 0.0);
    CHECK_LE(v, 1.0);
  }
}

TEST_CASE("normal pairs have standard moments") {
  const std::size_t n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (std::uint64_t k = 0; k < n / 2; ++k) {
    const auto p = rng::normal_pair(123, k, 0);
    s1 += p.z0 + p.z1;
    s2 += p.z0 * p.z0 + p.z1 * p.z1;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  CHECK_LT(std::fabs(mean), 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK_LT(std::fabs(var - 1.0), 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("normal quantile inverts the cdf") {
  for (double p : {1e-6, 0.001, 0.01, 0.25, 0.5, 0.75, 0.99, 0.999, 1 - 1e-6}) {
    CHECK_LT(std::fabs(stats::normal_cdf(stats::normal_quantile(p)) - p), 1e-8);
  }
  CHECK_LT(std::fabs(stats::normal_quantile(0.75) - 0.6744897501960817), 1e-8);
  CHECK_THROWS(stats::normal_quantile(0.0));
  CHECK_THROWS(stats::normal_quantile(1.0));
}

TEST_CASE("chi-square quantile approximation matches simulation") {
  // empirical chi-square(10) sample vs Wilson-Hilferty quantiles
  const std::size_t n = 100000;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::uint64_t j = 0; j < 5; ++j) {
      const auto p = rng::normal_pair(777, i, j);
      s += p.z0 * p.z0 + p.z1 * p.z1;
    }
    xs[i] = s;
  }
  std::sort(xs.begin(), xs.end());
  for (double q : {0.05, 0.5, 0.95}) {
    const double approx = stats::chi_square_quantile(q, 10.0);
    const double emp = xs[static_cast<std::size_t>(q * (n - 1))];
    CHECK_LT(std::fabs(approx - emp) / emp, 0.02);
  }
}

TEST_CASE("ks statistic: degenerate sample at the median scores one half") {
  std::vector<double> xs(100, 0.0);
  const double d = stats::ks_statistic(xs, [](double x) { return stats::normal_cdf(x); });
  CHECK_EQ(d, doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ks statistic: self-drawn sample passes the 1% asymptotic bound") {
  const std::size_t n = 10000;
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = rng::normal(2024, rng::counter(rng::Purpose::kTest, i), 0);
  const double d = stats::ks_statistic(xs, [](double x) { return stats::normal_cdf(x); });
  CHECK_LE(d, 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("two-sample ks of a set against itself is zero") {
  std::vector<double> xs;
  for (std::size_t i = 0; i < 500; ++i)
    xs.push_back(rng::uniform(rng::counter_hash(5, i, 0)));
  CHECK_EQ(stats::ks_statistic_two_sample(xs, xs), 0.0);
}

TEST_CASE("ks rejects empty input") {
  CHECK_THROWS(stats::ks_statistic({}, [](double) { return 0.5; }));
  CHECK_THROWS(stats::ks_statistic_two_sample({}, {1.0}));
}

TEST_CASE("moment helpers") {
  std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
  CHECK_EQ(stats::mean(xs), doctest::Approx(2.5));
  CHECK_EQ(stats::sample_variance(xs), doctest::Approx(5.0 / 3.0));
  CHECK_THROWS(stats::sample_variance({1.0}));
}
