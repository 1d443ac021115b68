#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "shearmix/rng.hpp"
#include "shearmix/torus.hpp"

namespace shearmix {

/// Shear profile g, 1-periodic with unit amplitude.
///   sine:             g(s) = sin(2 pi s)
///   piecewise_linear: triangle wave in phase with sine, slope +-4
enum class Profile { sine, piecewise_linear };

/// horizontal: x1 is displaced by a function of x2; vertical: the reverse.
enum class Axis { horizontal, vertical };

Profile parse_profile(std::string_view name);
std::string_view to_string(Profile p) noexcept;

double profile_value(Profile p, double s) noexcept;
/// g'(s); at triangle-wave kinks the left one-sided derivative.
double profile_slope(Profile p, double s) noexcept;
/// g(s + h) - g(s) without cancellation for tiny h.
double profile_difference(Profile p, double s, double h) noexcept;
/// sup |g'|: 2 pi for sine, 4 for the triangle wave.
double profile_max_slope(Profile p) noexcept;

/// One realization of the randomly shifted alternating shear.
///
/// Shift n is a pure function of (stream, n), so the schedule can be read in
/// any order. Period n uses (shift(2n), shift(2n+1)): a horizontal shear with
/// the even shift, then a vertical shear with the odd one.
struct ShearSchedule {
  double amplitude = 1.0;
  Profile profile = Profile::sine;
  RngStream shifts;

  double shift(std::uint64_t n) const noexcept { return shifts.uniform_at(n); }
  std::pair<double, double> period_shifts(std::uint64_t period) const noexcept {
    return {shift(2 * period), shift(2 * period + 1)};
  }
};

struct Vec2 {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// 2x2 real matrix, row major.
struct Jacobian2 {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  static Jacobian2 identity() noexcept { return {}; }
  double det() const noexcept { return a11 * a22 - a12 * a21; }
  Vec2 apply(const Vec2& v) const noexcept {
    return {a11 * v.v1 + a12 * v.v2, a21 * v.v1 + a22 * v.v2};
  }
  friend Jacobian2 operator*(const Jacobian2& l, const Jacobian2& r) noexcept {
    return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
            l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
  }
};

/// A pair of distinct points driven by the same randomness.
struct TwoPointState {
  TorusPoint x;
  TorusPoint y;
};

/// Base point and unit tangent direction.
struct ProjectiveState {
  TorusPoint x;
  Vec2 v{1.0, 0.0};
};

/// Two-point state stored as (x, y - x). The separation is advanced with
/// difference formulas, so pairs closer than machine precision relative to
/// the coordinates keep full relative accuracy.
struct SeparatedPair {
  TorusPoint base;
  Displacement sep;

  TwoPointState to_state() const noexcept { return {base, translate(base, sep)}; }
  static SeparatedPair from_state(const TwoPointState& s) noexcept {
    return {s.x, displacement(s.x, s.y)};
  }
};

/// Exact time-1 flow of the shear A g(. - zeta) along `axis`.
TorusPoint shear_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                      Profile profile) noexcept;

/// Horizontal shear with zeta_even, then vertical shear with zeta_odd.
TorusPoint double_step(const TorusPoint& x, double zeta_even, double zeta_odd, double amplitude,
                       Profile profile) noexcept;

Jacobian2 jacobian_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                        Profile profile) noexcept;

/// Chain-rule Jacobian of double_step at x.
Jacobian2 double_step_jacobian(const TorusPoint& x, double zeta_even, double zeta_odd,
                               double amplitude, Profile profile) noexcept;

/// Throws InvalidState when the points coincide.
TwoPointState two_point_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                             double amplitude, Profile profile);

ProjectiveState projective_shear_step(const ProjectiveState& p, double zeta, Axis axis,
                                      double amplitude, Profile profile) noexcept;
ProjectiveState projective_step(const ProjectiveState& p, double zeta_even, double zeta_odd,
                                double amplitude, Profile profile) noexcept;

SeparatedPair pair_shear_step(const SeparatedPair& p, double zeta, Axis axis, double amplitude,
                              Profile profile) noexcept;
SeparatedPair pair_double_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                               double amplitude, Profile profile) noexcept;

struct LyapunovEstimate {
  double estimate = 0.0;  ///< per double step
  double ci95 = 0.0;
};

/// Top Lyapunov exponent of the double-step cocycle. Sample k draws its start
/// point, direction and shifts from rng.substream(k).
/// Requires n_steps >= 100 and n_samples >= 10.
LyapunovEstimate lyapunov_exponent(double amplitude, Profile profile, int n_steps, int n_samples,
                                   const RngStream& rng);

struct GronwallConstants {
  double a1 = 0.0;  ///< sup |grad u|
  double c0 = 1.0;  ///< exp(a1)
};

GronwallConstants gronwall_constants(double amplitude, Profile profile = Profile::sine) noexcept;

}  // namespace shearmix
