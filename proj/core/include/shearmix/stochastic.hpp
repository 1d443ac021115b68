#pragma once

#include <vector>

#include "shearmix/flow.hpp"
#include "shearmix/rng.hpp"
#include "shearmix/torus.hpp"

namespace shearmix {

/// Sign of the drift in dX = -+u dt + sqrt(2 kappa) dW.
/// minus integrates -u. Under uniform shifts the two signs give the
/// same law, since -g(s) = g(s + 1/2) for both profiles.
enum class DriftSign { minus, plus };

struct SdeConfig {
  double kappa = 0.0;
  int substeps = 32;
  DriftSign drift_sign = DriftSign::minus;

  /// Throws std::invalid_argument when kappa < 0 or substeps < 1.
  void validate() const;
  double signed_amplitude(double amplitude) const noexcept {
    return drift_sign == DriftSign::plus ? amplitude : -amplitude;
  }
};

/// Standard two-dimensional Brownian path on [0, 1], sampled at the
/// 2 * resolution + 1 times k / (2 * resolution). The midpoints of a
/// `resolution`-substep grid are the odd indices, so one path can drive any
/// substep count that divides `resolution`.
struct BrownianPath {
  int resolution = 0;
  std::vector<double> cross;    ///< coordinate transverse to the shear
  std::vector<double> sheared;  ///< coordinate along the shear

  /// max over grid times of |W(t)|.
  double running_max() const noexcept;
};

BrownianPath sample_brownian_path(int resolution, RngStream& rng);

/// One unit time of shear plus noise, driven by a given Brownian path.
/// Requires path.resolution to be a multiple of cfg.substeps.
///
/// The cross coordinate moves as exact Brownian motion. The sheared
/// coordinate gains sign * A * int_0^1 g(cross(s) - zeta) ds (midpoint rule
/// over cfg.substeps) plus its own Brownian increment. kappa == 0 returns
/// shear_step with the signed amplitude.
TorusPoint sde_unit_step_with_path(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                                   Profile profile, const SdeConfig& cfg,
                                   const BrownianPath& path);

TorusPoint sde_unit_step(const TorusPoint& x, double zeta, Axis axis, double amplitude,
                         Profile profile, const SdeConfig& cfg, RngStream& rng);

/// Horizontal unit step with zeta_even, then vertical unit step with zeta_odd.
TorusPoint sde_double_step(const TorusPoint& x, double zeta_even, double zeta_odd,
                           double amplitude, Profile profile, const SdeConfig& cfg,
                           RngStream& rng);

/// Pulsed diffusion: horizontal shear, wrapped Gaussian kick of variance
/// kappa, vertical shear, second kick.
TorusPoint pulsed_step(const TorusPoint& x, double zeta_even, double zeta_odd, double amplitude,
                       Profile profile, double kappa, RngStream& rng);

/// Both points driven by the same Brownian paths (a stochastic flow).
/// Throws InvalidState when the points coincide.
TwoPointState two_point_sde_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                                 double amplitude, Profile profile, const SdeConfig& cfg,
                                 RngStream& rng);

/// Separation-accurate counterparts. The common noise cancels in the
/// separation exactly; only the drift difference moves it.
SeparatedPair pair_sde_unit_step(const SeparatedPair& p, double zeta, Axis axis,
                                 double amplitude, Profile profile, const SdeConfig& cfg,
                                 const BrownianPath& path);
SeparatedPair pair_sde_double_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                                   double amplitude, Profile profile, const SdeConfig& cfg,
                                   RngStream& rng);

/// Pulsed two-point step where each point receives its own independent kicks.
SeparatedPair pair_pulsed_independent_step(const SeparatedPair& p, double zeta_even,
                                           double zeta_odd, double amplitude, Profile profile,
                                           double kappa, RngStream& rng);

}  // namespace shearmix
