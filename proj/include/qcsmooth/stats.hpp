#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qcsmooth::stats {

/// Welford running mean / variance.
class RunningMoments {
 public:
  void push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  /// Standard error of the mean.
  double standard_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;

  bool passes(double significance) const { return p_value >= significance; }
};

/// One-sample test of `sample` against a continuous CDF.
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical distance c(alpha) * scale where scale = 1/sqrt(n) or sqrt((n+m)/(n m)).
double ks_critical_value(double significance, std::size_t n, std::size_t m = 0);

double mean(std::span<const double> xs);
double standard_error(std::span<const double> xs);

}  // namespace qcsmooth::stats
