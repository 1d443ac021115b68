#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace shearmix {

/// Real field on an n x n collocation grid over the unit torus.
///
/// Storage is row major: row j holds x2 = j / n and column i holds x1 = i / n,
/// so value(i, j) = values[j * n + i]. n must be a power of two >= 4.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(int n, double fill = 0.0);
  ScalarField(int n, std::vector<double> values);

  /// Samples fn(x1, x2) at the collocation points.
  static ScalarField from_function(int n, const std::function<double(double, double)>& fn);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(int i, int j) noexcept { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  double at(int i, int j) const noexcept { return values_[static_cast<std::size_t>(j) * n_ + i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Grid mean, i.e. the integral over the torus.
  double mean() const noexcept;
  bool all_finite() const noexcept;

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Norms of f - mean(f) at one instant.
struct NormEntry {
  double t = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  std::vector<double> sobolev;  ///< one value per requested order
};

/// Norm time series. `sobolev` holds the H^alpha norm for `sobolev_order`
/// (negative orders are the dual norms).
struct NormSeries {
  double sobolev_order = 0.0;
  std::vector<double> times;
  std::vector<double> l1;
  std::vector<double> l2;
  std::vector<double> linf;
  std::vector<double> sobolev;

  void push(const NormEntry& e);
  std::size_t size() const noexcept { return times.size(); }
};

}  // namespace shearmix
