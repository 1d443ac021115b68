#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shearmix {

/// 1.96, the two-sided 95% normal quantile used for every interval.
inline constexpr double kZ95 = 1.959963984540054;

/// Welford running mean / variance. Merging is order-dependent only through
/// floating round-off; callers merge in index order for reproducibility.
class RunningStats {
 public:
  void add(double v) noexcept;
  void merge(const RunningStats& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance (0 when fewer than two samples).
  double variance() const noexcept;
  double stddev() const noexcept;
  /// Standard error of the mean.
  double sem() const noexcept;
  /// Half width of the 95% normal-approximation interval.
  double ci95() const noexcept { return kZ95 * sem(); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

RunningStats summarize(std::span<const double> values) noexcept;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95) noexcept;

/// 95% interval for a proportion: normal approximation, or Wilson when either
/// count is below 30.
Interval proportion_interval(std::uint64_t successes, std::uint64_t trials) noexcept;

/// Least-squares line y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> residuals;
};

/// Requires at least two points with distinct x; throws std::invalid_argument otherwise.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Asymptotic Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda) noexcept;

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Two-sample Kolmogorov-Smirnov test (inputs are copied and sorted).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample KS test against Uniform[0, 1).
KsResult ks_uniform(std::vector<double> samples);

}  // namespace shearmix
