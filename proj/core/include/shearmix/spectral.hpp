#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shearmix/field.hpp"
#include "shearmix/flow.hpp"
#include "shearmix/torus.hpp"

namespace shearmix {

/// FFT plans and aligned work buffers for one grid size.
///
/// Plans use FFTW_ESTIMATE so that the chosen algorithm, and therefore every
/// floating-point result, is the same on every run. Instances are not thread
/// safe; use spectral_grid(n), which keeps one instance per thread.
class SpectralGrid {
 public:
  explicit SpectralGrid(int n);
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int n() const noexcept { return n_; }

  /// Translates every line parallel to `axis` by shift(coordinate) using a
  /// spectral phase shift. Exact for trigonometric interpolants.
  void translate_lines(ScalarField& f, Axis axis, const std::vector<double>& shift);

  /// Multiplies mode k by exp(-4 pi^2 kappa t |k|^2).
  void diffuse(ScalarField& f, double kappa, double t);

  /// Half-spectrum coefficients scaled by 1/n^2, layout [k2][k1] with
  /// k1 in [0, n/2] and k2 wrapped into [-n/2, n/2).
  std::vector<std::complex<double>> forward(const ScalarField& f);
  ScalarField inverse(std::span<const std::complex<double>> coeffs);

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

/// Per-thread cached grid for size n.
SpectralGrid& spectral_grid(int n);

/// Signed wavenumber for FFT index `index` on an n-point grid.
inline int wavenumber(int index, int n) noexcept { return index <= n / 2 ? index : index - n; }

/// Exact unit-time advection by the shear A g(. - zeta) along `axis`.
ScalarField advect_shear_exact(const ScalarField& f, double zeta, Axis axis, double amplitude,
                               Profile profile);

/// Exact heat propagator: mode k multiplied by exp(-4 pi^2 kappa t |k|^2).
/// Throws std::invalid_argument if kappa < 0 or t < 0.
ScalarField diffuse_exact(const ScalarField& f, double kappa, double t);

/// strang: (diffuse h/2, advect h, diffuse h/2) over split_substeps
///         substeps of each unit interval.
/// pulsed: advect for the whole interval, then a heat kick of variance kappa
///         (the density of pulsed_step).
enum class SplitScheme { strang, pulsed };

ScalarField unit_step(const ScalarField& f, double zeta, Axis axis, double kappa,
                      double amplitude, Profile profile, int split_substeps,
                      SplitScheme scheme = SplitScheme::strang);

/// One shear period: horizontal interval with zeta_even, vertical with zeta_odd.
ScalarField period_step(const ScalarField& f, double zeta_even, double zeta_odd, double kappa,
                        double amplitude, Profile profile, int split_substeps,
                        SplitScheme scheme = SplitScheme::strang);

/// L1, L2 (grid quadrature), Linf (grid max) of f - mean, and H^s norms with
/// weights (1 + 4 pi^2 |k|^2)^(s/2) for each s in `orders`.
NormEntry norms(const ScalarField& f, std::span<const double> orders = {});

double sobolev_norm(const ScalarField& f, double order);

/// Grid quadrature of f * g.
double inner_product_grid(const ScalarField& f, const ScalarField& g);
/// Sum over modes of f_k conj(g_k).
double inner_product_spectral(const ScalarField& f, const ScalarField& g);

/// Unit-mass periodized Gaussian centred at `center`, built from its Fourier
/// coefficients exp(-2 pi^2 sigma^2 |k|^2) so it is band limited on the grid.
ScalarField gaussian_bump(int n, const TorusPoint& center, double sigma);

/// Smallest power of two meeting the resolution rule
/// n >= 4 (A + 1) / sqrt(kappa) (kappa > 0), else 256.
int required_grid_size(double kappa, double amplitude);
bool is_resolved(int n, double kappa, double amplitude);

/// Point-mass surrogate width max(2 / n, sqrt(kappa)).
double surrogate_width(int n, double kappa);

struct DecayRun {
  NormSeries series;
  bool underresolved = false;
};

/// Evolves rho0 over n_periods shear periods and records norms at t = 0 and
/// every period boundary (t = 2n). `sobolev_order` selects the H^alpha column.
DecayRun decay_run(const ScalarField& rho0, const ShearSchedule& schedule, double kappa,
                   int n_periods, int split_substeps, double sobolev_order = -1.0,
                   SplitScheme scheme = SplitScheme::strang);

struct MixingOptions {
  int grid_size = 256;
  int split_substeps = 1;
  SplitScheme scheme = SplitScheme::strang;
  int sources_per_axis = 4;
};

struct MixingTimeResult {
  static constexpr int kNotMixed = -1;
  int t_mix = kNotMixed;               ///< periods, or kNotMixed
  std::vector<double> sup_density_gap;  ///< index n: sup |p_n - 1| after n periods
  bool underresolved = false;
};

/// Uniform mixing time in periods: the first n with
/// max over sources and grid points of |p_n - 1| < epsilon. Sources are a
/// sources_per_axis^2 lattice of narrow Gaussians of width delta_width
/// (<= 0 selects surrogate_width). Throws std::invalid_argument if epsilon <= 0.
MixingTimeResult mixing_time(double kappa, const ShearSchedule& schedule, double epsilon,
                             double delta_width, int n_max, const MixingOptions& options = {});

}  // namespace shearmix
