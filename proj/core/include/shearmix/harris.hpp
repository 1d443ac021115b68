#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shearmix/flow.hpp"
#include "shearmix/rng.hpp"
#include "shearmix/stats.hpp"
#include "shearmix/stochastic.hpp"
#include "shearmix/torus.hpp"

namespace shearmix {

// ------------------------------------------------------------ Lyapunov function

/// V(x, y) = min(dist_linf(x, y), s_star)^(-p).
struct LyapunovParams {
  double p = 0.2;
  double s_star = 0.1;

  /// Throws std::invalid_argument unless p in (0, 1/4] and s_star in (0, 1/2).
  void validate() const;
  /// s_star^(-p), the value of V away from the diagonal.
  double floor_value() const;
};

/// Throws InvalidState for coincident points.
double lyapunov_V(const TwoPointState& s, const LyapunovParams& params);
double lyapunov_V(const Displacement& sep, const LyapunovParams& params);

// ------------------------------------------------------------ two-point chain

enum class TwoPointNoise {
  common_sde,          ///< both points share the Brownian path
  pulsed_independent,  ///< each point receives its own Gaussian kicks
};

/// How a pair moves over one shear period. kappa == 0 is the deterministic
/// flow regardless of `noise`.
struct TwoPointDynamics {
  double kappa = 0.0;
  int substeps = 32;
  DriftSign drift_sign = DriftSign::plus;
  TwoPointNoise noise = TwoPointNoise::common_sde;
  Profile profile = Profile::sine;

  void validate() const;
  SdeConfig sde() const { return {kappa, substeps, drift_sign}; }
};

std::string_view to_string(TwoPointNoise n) noexcept;
TwoPointNoise parse_two_point_noise(std::string_view name);

/// One period of the pair chain with the given shifts.
SeparatedPair two_point_chain_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                                   double amplitude, const TwoPointDynamics& dyn,
                                   RngStream& noise);

/// Same period acting on full coordinates (no separation bookkeeping).
TwoPointState two_point_chain_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                                   double amplitude, const TwoPointDynamics& dyn,
                                   RngStream& noise);

/// One period with the shifts drawn from `rng` first, then the noise.
SeparatedPair two_point_chain_step(const SeparatedPair& p, double amplitude,
                                   const TwoPointDynamics& dyn, RngStream& rng);

/// Separation-only chain: the phases seen by the pair are drawn uniformly
/// every half period instead of being carried by a base point.
Displacement separation_chain_step(const Displacement& d, double amplitude,
                                   const TwoPointDynamics& dyn, RngStream& rng);

// ------------------------------------------------------------ drift

struct RatioEstimate {
  double ratio = 0.0;
  double ci = 0.0;  ///< 95% half width
};

/// Monte Carlo E[V(l periods of the pair chain)] / V(start). Sample k uses
/// rng.substream(k) for its shifts and noise.
RatioEstimate drift_ratio(const SeparatedPair& start, double amplitude,
                          const LyapunovParams& params, const TwoPointDynamics& dyn,
                          int n_shift_samples, const RngStream& rng, int steps = 1);
RatioEstimate drift_ratio(const TwoPointState& start, double amplitude,
                          const LyapunovParams& params, const TwoPointDynamics& dyn,
                          int n_shift_samples, const RngStream& rng, int steps = 1);

/// Start cells of the certificate. Inner separations are log spaced over
/// [min_separation, s_star) with the endpoint excluded; outer separations
/// are linearly spaced over [s_star, 1/2].
struct DriftGridSpec {
  int n_separations = 16;
  int n_directions = 8;
  int n_base_points = 4;
  int n_outer_separations = 6;
  double min_separation = 10.0 * 0x1.0p-52;

  void validate() const;
};

struct DriftCell {
  double separation = 0.0;  ///< sup-norm length of the start separation
  double angle = 0.0;       ///< direction in radians
  TorusPoint base;
  double ratio = 0.0;
  double ci = 0.0;
};

struct StepDrift {
  int steps = 1;
  double beta_hat = 0.0;
  double beta_ci = 0.0;
  bool pass = false;
};

struct DriftReport {
  double amplitude = 0.0;
  LyapunovParams params;
  TwoPointDynamics dynamics;
  double kappa = 0.0;
  int n_shift_samples = 0;
  double beta_hat = 0.0;  ///< ratio of the cell with the largest upper bound
  double beta_ci = 0.0;
  DriftCell worst_cell;
  double K_hat = 0.0;     ///< max E[V after one period] over outer starts
  double K_ci = 0.0;
  bool pass = false;      ///< beta_hat + beta_ci < 1
  std::vector<DriftCell> cells;
  std::vector<StepDrift> multi_step;  ///< filled when the single step fails

  std::string to_json() const;
};

/// Certifies E[V after one period] <= beta V inside the diagonal zone and
/// bounds it by K_hat outside. When the single-period certificate fails,
/// l = 2 .. max_steps periods are tried and recorded in `multi_step`.
DriftReport drift_certificate(double amplitude, const LyapunovParams& params,
                              const TwoPointDynamics& dyn, const DriftGridSpec& grid,
                              int n_shift_samples, const RngStream& rng, int max_steps = 4);

/// Largest measured l-period ratio over the certificate cells, as an
/// upper bound (ratio + ci), for checking composed drift bounds.
std::vector<DriftCell> drift_cells(double amplitude, const LyapunovParams& params,
                                   const TwoPointDynamics& dyn, const DriftGridSpec& grid,
                                   int n_shift_samples, const RngStream& rng, int steps);

// ------------------------------------------------------------ minorization

/// Axis-aligned box of separations intersected with {|d|_inf >= min_linf}.
struct SeparationBox {
  double d1_lo = -0.5, d1_hi = 0.5;
  double d2_lo = -0.5, d2_hi = 0.5;
  double min_linf = 0.0;

  bool contains(const Displacement& d) const noexcept;
  bool empty() const noexcept;
};

struct MinorizationResult {
  double alpha_hat = 0.0;    ///< min over starts of the hit frequency
  double alpha_lower = 0.0;  ///< Wilson lower bound at the worst start
  std::vector<double> per_start;
  std::size_t worst_start = 0;
};

/// Starts drawn uniformly from the sublevel set {V <= R}.
std::vector<TwoPointState> sample_sublevel_starts(const LyapunovParams& params, double R,
                                                  int count, const RngStream& rng);

MinorizationResult minorization_estimate(std::span<const TwoPointState> starts, int l,
                                         const SeparationBox& target, double amplitude,
                                         const TwoPointDynamics& dyn, int n_samples,
                                         const RngStream& rng);

// ------------------------------------------------------------ difference chain

struct DifferenceChainReport {
  int bins_per_axis = 8;
  std::vector<std::uint64_t> full_counts;
  std::vector<std::uint64_t> reduced_counts;
  std::vector<double> z;  ///< (full - reduced) / sqrt(full + reduced), 0 for empty bins
  double max_abs_z = 0.0;
};

/// One-period law of the separation from (a) the full pair chain with a
/// uniform base point and (b) separation_chain_step, both started from
/// separations uniform in the box |d|_inf <= 0.1.
DifferenceChainReport difference_chain_validation(double amplitude, const TwoPointDynamics& dyn,
                                                  int n_samples, const RngStream& rng);

// ------------------------------------------------------------ Ulam chain

/// Ulam discretization of the separation chain on an m x m grid over
/// [-1/2, 1/2)^2 with the cell [0, 1/m)^2 (which contains 0) removed.
struct UlamChain {
  int m = 0;
  double amplitude = 0.0;
  double kappa = 0.0;
  int samples_per_bin = 0;
  std::vector<double> matrix;  ///< row major, states() x states()

  int states() const noexcept { return m * m - 1; }
  int removed_cell() const noexcept { return (m / 2) * m + m / 2; }
  /// State index of a separation, or -1 in the removed cell.
  int state_of(const Displacement& d) const noexcept;
  Displacement bin_center(int state) const noexcept;
  double at(int row, int col) const noexcept {
    return matrix[static_cast<std::size_t>(row) * states() + col];
  }
  /// Largest |row sum - 1| and smallest entry.
  std::pair<double, double> stochasticity_error() const noexcept;

  std::string summary_json() const;
};

/// Requires m_bins >= 8 (even) and samples_per_bin >= 1000.
UlamChain ulam_build(double amplitude, const TwoPointDynamics& dyn, int m_bins,
                     int samples_per_bin, const RngStream& rng);

/// sum over bins of (1 + beta V_bin) |mu1 - mu2|. Throws std::invalid_argument
/// on size mismatch.
double rho_beta_distance(std::span<const double> mu1, std::span<const double> mu2,
                         std::span<const double> v_weights, double beta_weight);

struct ContractionReport {
  double alpha_bar_hat = 0.0;
  int n_pairs = 0;
  double second_eigenvalue = 0.0;  ///< |lambda_2| estimate
  double spectral_gap = 0.0;       ///< 1 - |lambda_2|, clamped to [0, 1]
  bool converged = false;
  int iterations = 0;
};

/// alpha_bar_hat is the largest rho_beta ratio over point-mass pairs and
/// random mixtures (at least 100 pairs in total) after l applications of
/// the chain. The gap comes from power iteration on mean-zero measures,
/// capped at 10^4 iterations.
ContractionReport contraction_factor(const UlamChain& chain, const LyapunovParams& params,
                                     double beta_weight, int l, const RngStream& rng,
                                     int n_pairs = 200);

ContractionReport contraction_factor(std::span<const double> matrix, int states,
                                     std::span<const double> v_weights, double beta_weight,
                                     int l, const RngStream& rng, int n_pairs = 200);

// ------------------------------------------------------------ correlations

struct ModePair {
  std::array<int, 2> m{1, 0};
  std::array<int, 2> mp{-1, 0};
};

/// (1,0), (0,1), (1,1), each paired with its negative.
std::vector<ModePair> default_modes();

struct CorrelationOptions {
  int substeps = 32;
  DriftSign drift_sign = DriftSign::plus;
  Profile profile = Profile::sine;
  double zeta = 0.0;  ///< tail exponent; <= 0 selects gamma_hat / 3
};

/// |<e_m, e_m' o X_n>| for n = 0 .. n_max, one row per mode.
using CorrelationSeries = std::vector<std::vector<double>>;

/// One realization. All particles move under the same shifts and the same
/// Brownian path, so X_n is a flow map.
CorrelationSeries correlation_series(double amplitude, double kappa,
                                     std::span<const ModePair> modes, int n_max, int n_particles,
                                     const RngStream& shifts, const RngStream& noise,
                                     const CorrelationOptions& options = {});

struct GammaFit {
  double gamma_hat = 0.0;
  bool decay = false;          ///< false: no decay was resolved, gamma_hat = 0
  bool floor_limited = false;  ///< decay faster than the noise floor resolves
};

/// Fits log |c_n| against n on the points above the noise floor, for the
/// mean magnitude over realizations of each mode, and returns the slowest
/// rate.
GammaFit fit_decay_rate(std::span<const CorrelationSeries> realizations, double noise_floor);

struct DHatResult {
  std::vector<int> N;  ///< per mode
  double K = 0.0;
  double D_hat = 1.0;
};

/// N is the last n at which |c_n| exceeds both exp(-zeta n) and the noise
/// floor (0 if never); K is the largest max(|m|, |m'|) with exp(zeta N) >
/// |m||m'| (at least 1); D_hat is the largest exp(zeta N) over modes with
/// both norms at most K.
DHatResult estimate_d_hat(const CorrelationSeries& series, std::span<const ModePair> modes,
                          double zeta, double noise_floor);

struct CorrelationReport {
  double amplitude = 0.0;
  double kappa = 0.0;
  int n_particles = 0;
  std::vector<ModePair> modes;
  std::vector<CorrelationSeries> series;  ///< per realization
  std::vector<std::vector<int>> N_hat;    ///< per realization, per mode
  std::vector<double> D_hat;              ///< per realization
  double D_kappa_hat = 0.0;               ///< mean over realizations
  double gamma_hat = 0.0;
  bool decay_flag = false;  ///< true when no decay was resolved
  bool floor_limited = false;
  double zeta = 0.0;
  double noise_floor = 0.0;

  std::string to_json() const;
};

/// Realization r uses shift stream rng.substream(0).substream(r) and noise
/// stream rng.substream(1).substream(r).
CorrelationReport correlation_decay(double amplitude, double kappa,
                                    std::span<const ModePair> modes, int n_max,
                                    int n_realizations, int n_particles, const RngStream& rng,
                                    const CorrelationOptions& options = {});

struct MomentRow {
  double kappa = 0.0;
  double q = 0.0;
  double mean = 0.0;
  double sem = 0.0;
};

struct MomentTable {
  double zeta = 0.0;
  std::vector<MomentRow> rows;
  std::vector<CorrelationReport> reports;  ///< one per kappa, in kappa_list order
  /// max over kappa of the moment, per q (same order as q_list)
  std::vector<double> max_over_kappa;
};

/// Empirical E[D_hat^q] per kappa with a common zeta taken from the fit at
/// the smallest kappa. Requires n_realizations >= 50.
MomentTable dkappa_moments(std::span<const double> q_list, std::span<const double> kappa_list,
                           int n_realizations, const RngStream& rng, double amplitude,
                           std::span<const ModePair> modes, int n_max, int n_particles,
                           const CorrelationOptions& options = {});

}  // namespace shearmix
