#include "qcsmooth/stats.hpp"

#include <algorithm>
#include <cmath>

namespace qcsmooth::stats {

double RunningMoments::standard_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double kolmogorov_q(double lambda) {
  // The series converges slowly near zero, where Q is 1 to double precision.
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

// Stephens' small-sample correction for the asymptotic distribution.
double corrected_lambda(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return (root + 0.12 + 0.11 / root) * d;
}

}  // namespace

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  KsResult r;
  r.n = sample.size();
  if (sample.empty()) return r;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  r.statistic = d;
  r.p_value = kolmogorov_q(corrected_lambda(d, n));
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  KsResult r;
  r.n = a.size();
  r.m = b.size();
  if (a.empty() || b.empty()) return r;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  r.statistic = d;
  r.p_value = kolmogorov_q(corrected_lambda(d, na * nb / (na + nb)));
  return r;
}

double ks_critical_value(double significance, std::size_t n, std::size_t m) {
  // c(alpha) = sqrt(-ln(alpha / 2) / 2)
  const double c = std::sqrt(-0.5 * std::log(0.5 * significance));
  const double dn = static_cast<double>(n);
  if (m == 0) return c / std::sqrt(dn);
  const double dm = static_cast<double>(m);
  return c * std::sqrt((dn + dm) / (dn * dm));
}

double mean(std::span<const double> xs) {
  RunningMoments acc;
  for (double x : xs) acc.push(x);
  return acc.mean();
}

double standard_error(std::span<const double> xs) {
  RunningMoments acc;
  for (double x : xs) acc.push(x);
  return acc.standard_error();
}

}  // namespace qcsmooth::stats
