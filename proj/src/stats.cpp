#include "beablesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beablesim {

double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_samples[i]);
    const double hi = static_cast<double>(i + 1) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  return d;
}

double ks_two_sample_statistic(const std::vector<double>& sorted_a,
                               const std::vector<double>& sorted_b) {
  const std::size_t n = sorted_a.size();
  const std::size_t m = sorted_b.size();
  if (n == 0 || m == 0) throw std::invalid_argument("ks_two_sample_statistic: empty sample");
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const double x = std::min(sorted_a[i], sorted_b[j]);
    while (i < n && sorted_a[i] <= x) ++i;
    while (j < m && sorted_b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_critical(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

double ks_two_sample_critical(std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return 1.63 * std::sqrt((dn + dm) / (dn * dm));
}

double chi_squared_uniform(const std::vector<std::size_t>& counts) {
  if (counts.empty()) throw std::invalid_argument("chi_squared_uniform: no bins");
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  const double expected = static_cast<double>(total) / counts.size();
  if (expected <= 0.0) throw std::invalid_argument("chi_squared_uniform: empty counts");
  double chi2 = 0.0;
  for (std::size_t c : counts) {
    const double diff = static_cast<double>(c) - expected;
    chi2 += diff * diff / expected;
  }
  return chi2;
}

double chi_squared_critical_99(std::size_t dof) {
  // Wilson-Hilferty: chi2_p ~ k (1 - 2/(9k) + z_p sqrt(2/(9k)))^3, z_0.99 = 2.3263.
  const double k = static_cast<double>(dof);
  const double z = 2.3263478740408408;
  const double a = 2.0 / (9.0 * k);
  const double base = 1.0 - a + z * std::sqrt(a);
  return k * base * base * base;
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("pearson_correlation: size mismatch or empty");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

Histogram::Histogram(double lo_, double hi_, std::size_t bins) : lo(lo_), hi(hi_), counts(bins, 0) {
  if (!(hi > lo) || bins == 0) throw std::invalid_argument("Histogram: invalid range or bins");
}

void Histogram::add(double x) {
  if (x < lo) {
    ++underflow;
    return;
  }
  if (x >= hi) {
    ++overflow;
    return;
  }
  const auto idx = static_cast<std::size_t>((x - lo) / (hi - lo) * counts.size());
  ++counts[std::min(idx, counts.size() - 1)];
}

std::size_t Histogram::total_in_range() const {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return total;
}

}  // namespace beablesim
