#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace beablesim {

/// One-sample Kolmogorov-Smirnov statistic D for sorted samples against a
/// reference CDF.
double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf);

/// Two-sample KS statistic for two sorted samples.
double ks_two_sample_statistic(const std::vector<double>& sorted_a,
                               const std::vector<double>& sorted_b);

/// Asymptotic critical value 1.63 / sqrt(n) at alpha = 0.01 (approximate for
/// n < 100).
double ks_critical(std::size_t n);

/// Two-sample analogue 1.63 * sqrt((n + m) / (n m)) at alpha = 0.01.
double ks_two_sample_critical(std::size_t n, std::size_t m);

/// Pearson chi-squared statistic of observed counts against the uniform
/// expectation.
double chi_squared_uniform(const std::vector<std::size_t>& counts);

/// 99th percentile of the chi-squared distribution with the given degrees of
/// freedom (Wilson-Hilferty approximation, adequate for dof >= 10).
double chi_squared_critical_99(std::size_t dof);

/// Sample Pearson correlation coefficient.
double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

/// Fixed-range histogram with uniform bins.
struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  Histogram() = default;
  Histogram(double lo, double hi, std::size_t bins);

  void add(double x);
  std::size_t total_in_range() const;
};

}  // namespace beablesim
