#include "shearmix/flow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "shearmix/parallel.hpp"
#include "shearmix/stats.hpp"

namespace shearmix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Phase of the triangle wave: g = 1 - 4|t - 1/2| with t = frac(s + 1/4).
double triangle_phase(double s) noexcept { return wrap_unit(s + 0.25); }

// Integral of the triangle-wave slope over [a, b] in phase coordinates.
// Slope is +4 on (k/2, (k+1)/2) for even k and -4 for odd k.
double triangle_rise(double a, double b) noexcept {
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    const double k = std::floor(2.0 * lo);
    double hi = (k + 1.0) * 0.5;
    if (hi > b) hi = b;
    const bool rising = static_cast<long long>(k) % 2 == 0;
    total += (rising ? 4.0 : -4.0) * (hi - lo);
    if (hi <= lo) break;
    lo = hi;
  }
  return total;
}

}  // namespace

Profile parse_profile(std::string_view name) {
  if (name == "sine") return Profile::sine;
  if (name == "piecewise_linear") return Profile::piecewise_linear;
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

std::string_view to_string(Profile p) noexcept {
  return p == Profile::sine ? "sine" : "piecewise_linear";
}

double profile_value(Profile p, double s) noexcept {
  if (p == Profile::sine) return std::sin(kTwoPi * s);
  const double t = triangle_phase(s);
  return 1.0 - 4.0 * std::abs(t - 0.5);
}

double profile_slope(Profile p, double s) noexcept {
  if (p == Profile::sine) return kTwoPi * std::cos(kTwoPi * s);
  const double t = triangle_phase(s);
  return (t > 0.0 && t <= 0.5) ? 4.0 : -4.0;
}

double profile_difference(Profile p, double s, double h) noexcept {
  if (p == Profile::sine) {
    // sin(a + b) - sin(a) = 2 cos(a + b/2) sin(b/2)
    return 2.0 * std::cos(kTwoPi * s + std::numbers::pi * h) * std::sin(std::numbers::pi * h);
  }
  const double t = triangle_phase(s);
  // Inside one linear piece the difference is slope * h, which keeps full
  // relative accuracy when t + h rounds back to t.
  const double k = std::floor(2.0 * t);
  const double slope = static_cast<long long>(k) % 2 == 0 ? 4.0 : -4.0;
  if (h >= 0.0 ? h <= (k + 1.0) * 0.5 - t : -h <= t - k * 0.5) return slope * h;
  return h >= 0.0 ? triangle_rise(t, t + h) : -triangle_rise(t + h, t);
}

double profile_max_slope(Profile p) noexcept { return p == Profile::sine ? kTwoPi : 4.0; }

TorusPoint shear_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                      Profile profile) noexcept {
  if (axis == Axis::horizontal) {
    return {wrap_unit(x.x1 + amplitude * profile_value(profile, x.x2 - zeta)), x.x2};
  }
  return {x.x1, wrap_unit(x.x2 + amplitude * profile_value(profile, x.x1 - zeta))};
}

TorusPoint double_step(const TorusPoint& x, double zeta_even, double zeta_odd, double amplitude,
                       Profile profile) noexcept {
  const TorusPoint h = shear_step(x, zeta_even, Axis::horizontal, amplitude, profile);
  return shear_step(h, zeta_odd, Axis::vertical, amplitude, profile);
}

Jacobian2 jacobian_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                        Profile profile) noexcept {
  Jacobian2 j;
  if (axis == Axis::horizontal) {
    j.a12 = amplitude * profile_slope(profile, x.x2 - zeta);
  } else {
    j.a21 = amplitude * profile_slope(profile, x.x1 - zeta);
  }
  return j;
}

Jacobian2 double_step_jacobian(const TorusPoint& x, double zeta_even, double zeta_odd,
                               double amplitude, Profile profile) noexcept {
  const Jacobian2 jh = jacobian_step(x, zeta_even, Axis::horizontal, amplitude, profile);
  const TorusPoint mid = shear_step(x, zeta_even, Axis::horizontal, amplitude, profile);
  const Jacobian2 jv = jacobian_step(mid, zeta_odd, Axis::vertical, amplitude, profile);
  return jv * jh;
}

TwoPointState two_point_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                             double amplitude, Profile profile) {
  if (s.x == s.y) throw InvalidState("two_point_step: coincident points");
  return {double_step(s.x, zeta_even, zeta_odd, amplitude, profile),
          double_step(s.y, zeta_even, zeta_odd, amplitude, profile)};
}

ProjectiveState projective_shear_step(const ProjectiveState& p, double zeta, Axis axis,
                                      double amplitude, Profile profile) noexcept {
  const Vec2 w = jacobian_step(p.x, zeta, axis, amplitude, profile).apply(p.v);
  const double len = std::hypot(w.v1, w.v2);
  return {shear_step(p.x, zeta, axis, amplitude, profile), {w.v1 / len, w.v2 / len}};
}

ProjectiveState projective_step(const ProjectiveState& p, double zeta_even, double zeta_odd,
                                double amplitude, Profile profile) noexcept {
  return projective_shear_step(
      projective_shear_step(p, zeta_even, Axis::horizontal, amplitude, profile), zeta_odd,
      Axis::vertical, amplitude, profile);
}

SeparatedPair pair_shear_step(const SeparatedPair& p, double zeta, Axis axis, double amplitude,
                              Profile profile) noexcept {
  SeparatedPair out{shear_step(p.base, zeta, axis, amplitude, profile), p.sep};
  if (axis == Axis::horizontal) {
    out.sep.d1 = wrap_centered(
        p.sep.d1 + amplitude * profile_difference(profile, p.base.x2 - zeta, p.sep.d2));
  } else {
    out.sep.d2 = wrap_centered(
        p.sep.d2 + amplitude * profile_difference(profile, p.base.x1 - zeta, p.sep.d1));
  }
  return out;
}

SeparatedPair pair_double_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                               double amplitude, Profile profile) noexcept {
  return pair_shear_step(pair_shear_step(p, zeta_even, Axis::horizontal, amplitude, profile),
                         zeta_odd, Axis::vertical, amplitude, profile);
}

LyapunovEstimate lyapunov_exponent(double amplitude, Profile profile, int n_steps, int n_samples,
                                   const RngStream& rng) {
  if (n_steps < 100) throw std::invalid_argument("lyapunov_exponent: n_steps must be >= 100");
  if (n_samples < 10) throw std::invalid_argument("lyapunov_exponent: n_samples must be >= 10");

  std::vector<double> per_sample(static_cast<std::size_t>(n_samples));
  parallel_for(per_sample.size(), [&](std::size_t k) {
    RngStream s = rng.substream(k);
    TorusPoint x = uniform_point(s);
    const double angle = kTwoPi * s.uniform();
    Vec2 v{std::cos(angle), std::sin(angle)};
    double log_growth = 0.0;
    for (int step = 0; step < n_steps; ++step) {
      const double ze = s.uniform();
      const double zo = s.uniform();
      const Vec2 w = double_step_jacobian(x, ze, zo, amplitude, profile).apply(v);
      const double len = std::hypot(w.v1, w.v2);
      log_growth += std::log(len);
      v = {w.v1 / len, w.v2 / len};
      x = double_step(x, ze, zo, amplitude, profile);
    }
    per_sample[k] = log_growth / n_steps;
  });

  const RunningStats st = summarize(per_sample);
  return {st.mean(), st.ci95()};
}

GronwallConstants gronwall_constants(double amplitude, Profile profile) noexcept {
  const double a1 = std::abs(amplitude) * profile_max_slope(profile);
  return {a1, std::exp(a1)};
}

}  // namespace shearmix
