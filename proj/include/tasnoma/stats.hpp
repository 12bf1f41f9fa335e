#pragma once

// Kolmogorov-Smirnov tests and sample correlation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <boost/math/statistics/bivariate_statistics.hpp>

#include "tasnoma/errors.hpp"

namespace tasnoma::stats {

struct ks_result {
  double statistic = 0;  // sup |F_a - F_b|
  double critical = 0;   // rejection threshold at the requested level
  double p_value = 1;    // asymptotic
  bool accept = true;
};

// Survival function of the Kolmogorov distribution,
// Q(l) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 l^2).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;  // 1 - Q < 1e-12 here and the alternating sum cancels badly
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += t;
    if (std::fabs(t) < 1e-17 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Large-sample critical value c(level) with Q(c) ~ level: sqrt(-ln(level/2)/2).
inline double kolmogorov_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) throw invalid_parameter("significance level must lie in (0, 1)");
  return std::sqrt(-std::log(level / 2.0) / 2.0);
}

namespace detail {

inline ks_result finish(double d, double effective_n, double level) {
  const double root = std::sqrt(effective_n);
  ks_result r;
  r.statistic = d;
  r.critical = kolmogorov_critical(level) / root;
  // Stephens' small-sample correction of the argument.
  r.p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
  r.accept = d <= r.critical;
  return r;
}

}  // namespace detail

// One-sample test of `sample` against a continuous CDF.
template <class Cdf>
ks_result ks_one_sample(std::span<const double> sample, Cdf&& cdf, double level = 0.01) {
  if (sample.empty()) throw invalid_parameter("KS test needs a nonempty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return detail::finish(d, n, level);
}

// Two-sample test; ties are handled by advancing through equal values together.
inline ks_result ks_two_sample(std::span<const double> a, std::span<const double> b, double level = 0.01) {
  if (a.empty() || b.empty()) throw invalid_parameter("KS test needs two nonempty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(i / n - j / m));
  }
  return detail::finish(d, n * m / (n + m), level);
}

// Pearson sample correlation.
inline double correlation(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 2) throw invalid_parameter("correlation needs two samples of equal size >= 2");
  const std::vector<double> a(u.begin(), u.end()), b(v.begin(), v.end());
  return boost::math::statistics::correlation_coefficient(a, b);
}

}  // namespace tasnoma::stats
