#include "shearmix/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shearmix {

void SdeConfig::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw std::invalid_argument("SdeConfig: kappa must be finite and >= 0");
  }
  if (substeps < 1) throw std::invalid_argument("SdeConfig: substeps must be >= 1");
}

double BrownianPath::running_max() const noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < cross.size(); ++k) {
    m = std::max(m, std::hypot(cross[k], sheared[k]));
  }
  return m;
}

BrownianPath sample_brownian_path(int resolution, RngStream& rng) {
  if (resolution < 1) throw std::invalid_argument("sample_brownian_path: resolution must be >= 1");
  BrownianPath path;
  path.resolution = resolution;
  const std::size_t points = 2 * static_cast<std::size_t>(resolution) + 1;
  path.cross.assign(points, 0.0);
  path.sheared.assign(points, 0.0);
  const double sd = std::sqrt(0.5 / resolution);
  for (std::size_t k = 1; k < points; ++k) {
    path.cross[k] = path.cross[k - 1] + sd * rng.normal();
    path.sheared[k] = path.sheared[k - 1] + sd * rng.normal();
  }
  return path;
}

namespace {

int path_stride(const BrownianPath& path, const SdeConfig& cfg) {
  if (path.resolution % cfg.substeps != 0) {
    throw std::invalid_argument("BrownianPath resolution must be a multiple of substeps");
  }
  return path.resolution / cfg.substeps;
}

// (cross, sheared) coordinates of x for a shear along `axis`.
std::pair<double, double> split(const TorusPoint& x, Axis axis) noexcept {
  return axis == Axis::horizontal ? std::pair{x.x2, x.x1} : std::pair{x.x1, x.x2};
}

TorusPoint join(double cross, double sheared, Axis axis) noexcept {
  return axis == Axis::horizontal ? TorusPoint{sheared, cross} : TorusPoint{cross, sheared};
}

}  // namespace

TorusPoint sde_unit_step_with_path(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                                   Profile profile, const SdeConfig& cfg,
                                   const BrownianPath& path) {
  const double amp = cfg.signed_amplitude(amplitude);
  if (cfg.kappa == 0.0) return shear_step(x, zeta, axis, amp, profile);

  const int stride = path_stride(path, cfg);
  const double sigma = std::sqrt(2.0 * cfg.kappa);
  const auto [cross, sheared] = split(x, axis);
  double integral = 0.0;
  for (int j = 0; j < cfg.substeps; ++j) {
    const double w = path.cross[static_cast<std::size_t>((2 * j + 1) * stride)];
    integral += profile_value(profile, cross + sigma * w - zeta);
  }
  integral /= cfg.substeps;
  const double new_cross = wrap_unit(cross + sigma * path.cross.back());
  const double new_sheared = wrap_unit(sheared + amp * integral + sigma * path.sheared.back());
  return join(new_cross, new_sheared, axis);
}

TorusPoint sde_unit_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                         Profile profile, const SdeConfig& cfg, RngStream& rng) {
  cfg.validate();
  if (cfg.kappa == 0.0) return shear_step(x, zeta, axis, cfg.signed_amplitude(amplitude), profile);
  const BrownianPath path = sample_brownian_path(cfg.substeps, rng);
  return sde_unit_step_with_path(x, zeta, axis, amplitude, profile, cfg, path);
}

TorusPoint sde_double_step(const TorusPoint& x, double zeta_even, double zeta_odd,
                           double amplitude, Profile profile, const SdeConfig& cfg,
                           RngStream& rng) {
  const TorusPoint h = sde_unit_step(x, zeta_even, Axis::horizontal, amplitude, profile, cfg, rng);
  return sde_unit_step(h, zeta_odd, Axis::vertical, amplitude, profile, cfg, rng);
}

TorusPoint pulsed_step(const TorusPoint& x, double zeta_even, double zeta_odd, double amplitude,
                       Profile profile, double kappa, RngStream& rng) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("pulsed_step: kappa must be >= 0");
  TorusPoint y = shear_step(x, zeta_even, Axis::horizontal, amplitude, profile);
  if (kappa > 0.0) y = translate(y, wrapped_gaussian(kappa, rng));
  y = shear_step(y, zeta_odd, Axis::vertical, amplitude, profile);
  if (kappa > 0.0) y = translate(y, wrapped_gaussian(kappa, rng));
  return y;
}

TwoPointState two_point_sde_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                                 double amplitude, Profile profile, const SdeConfig& cfg,
                                 RngStream& rng) {
  if (s.x == s.y) throw InvalidState("two_point_sde_step: coincident points");
  cfg.validate();
  if (cfg.kappa == 0.0) {
    const double amp = cfg.signed_amplitude(amplitude);
    return two_point_step(s, zeta_even, zeta_odd, amp, profile);
  }
  TwoPointState out = s;
  for (const auto& [zeta, axis] : {std::pair{zeta_even, Axis::horizontal},
                                   std::pair{zeta_odd, Axis::vertical}}) {
    const BrownianPath path = sample_brownian_path(cfg.substeps, rng);
    out.x = sde_unit_step_with_path(out.x, zeta, axis, amplitude, profile, cfg, path);
    out.y = sde_unit_step_with_path(out.y, zeta, axis, amplitude, profile, cfg, path);
  }
  return out;
}

SeparatedPair pair_sde_unit_step(const SeparatedPair& p, double zeta, Axis axis,
                                 double amplitude, Profile profile, const SdeConfig& cfg,
                                 const BrownianPath& path) {
  const double amp = cfg.signed_amplitude(amplitude);
  if (cfg.kappa == 0.0) return pair_shear_step(p, zeta, axis, amp, profile);

  const int stride = path_stride(path, cfg);
  const double sigma = std::sqrt(2.0 * cfg.kappa);
  const auto [cross, sheared] = split(p.base, axis);
  const double sep_cross = axis == Axis::horizontal ? p.sep.d2 : p.sep.d1;
  double drift = 0.0;
  double drift_diff = 0.0;
  for (int j = 0; j < cfg.substeps; ++j) {
    const double w = path.cross[static_cast<std::size_t>((2 * j + 1) * stride)];
    const double phase = cross + sigma * w - zeta;
    drift += profile_value(profile, phase);
    drift_diff += profile_difference(profile, phase, sep_cross);
  }
  drift /= cfg.substeps;
  drift_diff /= cfg.substeps;

  SeparatedPair out;
  out.base = join(wrap_unit(cross + sigma * path.cross.back()),
                  wrap_unit(sheared + amp * drift + sigma * path.sheared.back()), axis);
  out.sep = p.sep;
  if (axis == Axis::horizontal) {
    out.sep.d1 = wrap_centered(p.sep.d1 + amp * drift_diff);
  } else {
    out.sep.d2 = wrap_centered(p.sep.d2 + amp * drift_diff);
  }
  return out;
}

SeparatedPair pair_sde_double_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                                   double amplitude, Profile profile, const SdeConfig& cfg,
                                   RngStream& rng) {
  if (cfg.kappa == 0.0) {
    return pair_double_step(p, zeta_even, zeta_odd, cfg.signed_amplitude(amplitude), profile);
  }
  const BrownianPath ph = sample_brownian_path(cfg.substeps, rng);
  const SeparatedPair h =
      pair_sde_unit_step(p, zeta_even, Axis::horizontal, amplitude, profile, cfg, ph);
  const BrownianPath pv = sample_brownian_path(cfg.substeps, rng);
  return pair_sde_unit_step(h, zeta_odd, Axis::vertical, amplitude, profile, cfg, pv);
}

SeparatedPair pair_pulsed_independent_step(const SeparatedPair& p, double zeta_even,
                                           double zeta_odd, double amplitude, Profile profile,
                                           double kappa, RngStream& rng) {
  SeparatedPair q = pair_shear_step(p, zeta_even, Axis::horizontal, amplitude, profile);
  auto kick = [&](SeparatedPair& s) {
    if (kappa <= 0.0) return;
    const Displacement kx = wrapped_gaussian(kappa, rng);
    const Displacement ky = wrapped_gaussian(kappa, rng);
    s.base = translate(s.base, kx);
    s.sep = {wrap_centered(s.sep.d1 + ky.d1 - kx.d1), wrap_centered(s.sep.d2 + ky.d2 - kx.d2)};
  };
  kick(q);
  q = pair_shear_step(q, zeta_odd, Axis::vertical, amplitude, profile);
  kick(q);
  return q;
}

}  // namespace shearmix
