#pragma once

#include <cmath>
#include <stdexcept>

#include "shearmix/rng.hpp"

namespace shearmix {

/// Thrown when a state violates its domain (e.g. coincident two-point states).
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Point on the unit torus; both coordinates in [0, 1).
struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Minimal wrapped difference vector; both components in [-1/2, 1/2).
struct Displacement {
  double d1 = 0.0;
  double d2 = 0.0;

  Displacement operator-() const { return {-d1, -d2}; }
  friend bool operator==(const Displacement&, const Displacement&) = default;
};

/// Reduces a real to [0, 1). Never returns 1.0.
inline double wrap_unit(double v) noexcept {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

/// Reduces a real to the minimal representative in [-1/2, 1/2).
inline double wrap_centered(double v) noexcept {
  double r = v - std::floor(v + 0.5);
  return r >= 0.5 ? r - 1.0 : r;
}

/// Wraps an arbitrary finite pair onto the torus.
/// Throws std::invalid_argument on NaN or infinity.
TorusPoint wrap(double x1, double x2);

/// Minimal representative of y - x. A tie at +-1/2 resolves to -1/2.
Displacement displacement(const TorusPoint& x, const TorusPoint& y) noexcept;

/// x + d, wrapped.
TorusPoint translate(const TorusPoint& x, const Displacement& d) noexcept;

double norm(const Displacement& d) noexcept;
double norm_linf(const Displacement& d) noexcept;

/// Euclidean torus distance.
double dist(const TorusPoint& x, const TorusPoint& y) noexcept;
/// Max-norm torus distance.
double dist_linf(const TorusPoint& x, const TorusPoint& y) noexcept;

/// Uniformly distributed point.
TorusPoint uniform_point(RngStream& rng) noexcept;

/// Gaussian on R^2 with the given per-coordinate variance, reduced mod 1.
/// Exact in law for the periodized Gaussian.
Displacement wrapped_gaussian(double variance, RngStream& rng);

}  // namespace shearmix
