#include "shearmix/torus.hpp"

#include <algorithm>
#include <numbers>

namespace shearmix {

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

TorusPoint wrap(double x1, double x2) {
  if (!std::isfinite(x1) || !std::isfinite(x2)) {
    throw std::invalid_argument("wrap: non-finite coordinate");
  }
  return {wrap_unit(x1), wrap_unit(x2)};
}

Displacement displacement(const TorusPoint& x, const TorusPoint& y) noexcept {
  return {wrap_centered(y.x1 - x.x1), wrap_centered(y.x2 - x.x2)};
}

TorusPoint translate(const TorusPoint& x, const Displacement& d) noexcept {
  return {wrap_unit(x.x1 + d.d1), wrap_unit(x.x2 + d.d2)};
}

double norm(const Displacement& d) noexcept { return std::hypot(d.d1, d.d2); }

double norm_linf(const Displacement& d) noexcept {
  return std::max(std::abs(d.d1), std::abs(d.d2));
}

double dist(const TorusPoint& x, const TorusPoint& y) noexcept {
  return norm(displacement(x, y));
}

double dist_linf(const TorusPoint& x, const TorusPoint& y) noexcept {
  return norm_linf(displacement(x, y));
}

TorusPoint uniform_point(RngStream& rng) noexcept {
  const double a = rng.uniform();
  const double b = rng.uniform();
  return {a, b};
}

Displacement wrapped_gaussian(double variance, RngStream& rng) {
  if (!(variance >= 0.0)) {
    throw std::invalid_argument("wrapped_gaussian: variance must be non-negative");
  }
  const double sd = std::sqrt(variance);
  const double g1 = rng.normal();
  const double g2 = rng.normal();
  return {wrap_centered(sd * g1), wrap_centered(sd * g2)};
}

}  // namespace shearmix
