#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shearmix/field.hpp"
#include "shearmix/flow.hpp"
#include "shearmix/harris.hpp"
#include "shearmix/spectral.hpp"
#include "shearmix/stats.hpp"

namespace shearmix {

/// Raised for configurations that fail validation (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind {
  simulate,
  ed_verify,
  mixing_sweep,
  drift_cert,
  ulam_gap,
  exponent,
  correlations,
  smoothing_scaling,
};

std::string_view to_string(ExperimentKind k) noexcept;
ExperimentKind parse_experiment(std::string_view name);

/// Every knob of every experiment. JSON keys match the member names; absent
/// keys keep the defaults below. See docs/config.md for the schema.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::simulate;
  double amplitude = 0.5;
  Profile profile = Profile::sine;
  std::vector<double> kappa_list;  ///< strictly positive, descending
  bool include_kappa_zero = false;  ///< drift_cert / ulam_gap also run kappa = 0
  std::vector<std::uint64_t> seeds;
  std::filesystem::path output_dir = "out";

  // spectral runs
  int grid_size = 256;
  bool auto_resolve = true;  ///< raise the grid to the resolution rule
  int split_substeps = 1;
  SplitScheme scheme = SplitScheme::strang;
  int n_periods = 20;
  double delta_width = -1.0;  ///< <= 0: surrogate width

  // mixing sweep
  double epsilon = 1e-2;
  int n_max = 2000;
  int sources_per_axis = 4;

  // ed_verify / smoothing
  double alpha = 1.0;
  double gamma = 0.0;  ///< <= 0: fitted in-run
  std::vector<double> q_list{1.0, 2.0};
  std::vector<double> width_factors{0.25, 0.125};

  // two-point chain
  LyapunovParams lyapunov;
  TwoPointNoise noise = TwoPointNoise::common_sde;
  DriftSign drift_sign = DriftSign::plus;
  int sde_substeps = 32;
  int shift_samples = 10000;
  DriftGridSpec drift_grid;
  int max_steps = 4;
  int ulam_bins = 32;
  int samples_per_bin = 10000;
  double beta_weight = 0.1;
  int contraction_steps = 1;
  int contraction_pairs = 200;

  // exponent
  int n_steps = 1000;
  int n_samples = 100;

  // correlations
  int n_particles = 10000;
  int n_realizations = 50;
  int correlation_n_max = 30;
  std::vector<ModePair> modes = default_modes();

  /// Parses and validates. Throws ConfigError with a readable message.
  static ExperimentConfig from_json(const std::string& text);
  /// Throws ConfigError naming the path when the file is missing.
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_json() const;
  void validate() const;

  TwoPointDynamics dynamics(double kappa) const;
};

// ------------------------------------------------------------------ mixing

struct MixingPoint {
  double kappa = 0.0;
  int grid_size = 0;
  bool underresolved = false;
  std::vector<int> t_mix_per_seed;  ///< kNotMixed for runs that never mixed
  double t_mix = 0.0;               ///< mean over mixed seeds, periods
  double t_heat = 0.0;              ///< heat-only baseline, periods
  bool used_in_fit = false;
  std::string excluded_reason;
};

struct CurveFit {
  bool valid = false;  ///< false when fewer than 4 points survived
  LinearFit fit;       ///< intercept a, slope b
  std::vector<double> x;
  std::vector<double> y;
};

struct MixingCurve {
  double amplitude = 0.0;
  double epsilon = 0.0;
  std::vector<MixingPoint> points;
  CurveFit log_fit;      ///< t_mix = a + b ln(1/kappa)
  CurveFit inverse_fit;  ///< t_mix = a + b / kappa
  std::vector<std::string> warnings;
};

MixingCurve run_mixing_sweep(const ExperimentConfig& cfg);
std::string mixing_curve_csv(const MixingCurve& curve);
std::string mixing_fit_json(const MixingCurve& curve);

/// Periods for a pure heat flow started from a Gaussian of width sigma to
/// reach sup |p - 1| < epsilon, from the four slowest modes.
double heat_mixing_periods(double kappa, double sigma, double epsilon);

// ------------------------------------------------------------------ ed_verify

/// max over n of linf[n] e^(gamma n) kappa^(1 + alpha) / l1_initial, with
/// d = 2 and n counted in periods.
double ed_prefactor(std::span<const double> linf, double l1_initial, double gamma, double kappa,
                    double alpha);

/// Decay rate per period of log linf over its decaying tail; 0 if none.
double fit_linf_rate(const NormSeries& series);

struct EdRun {
  std::uint64_t seed = 0;
  double kappa = 0.0;
  double D_hat = 0.0;
  bool excluded = false;
  std::string diagnostic;
};

struct EdMoment {
  double kappa = 0.0;
  double q = 0.0;
  double mean = 0.0;
  double sem = 0.0;
};

struct EdVerifyResult {
  double gamma = 0.0;
  bool gamma_fitted = false;
  double alpha = 0.0;
  std::vector<EdRun> runs;
  std::vector<EdMoment> moments;
  bool kappa_trend = false;  ///< some pair of kappas differs by > 2 standard errors
  std::vector<std::string> warnings;
};

EdVerifyResult run_ed_verify(const ExperimentConfig& cfg);
std::string ed_runs_csv(const EdVerifyResult& r);
std::string ed_moments_csv(const EdVerifyResult& r);

// ------------------------------------------------------------------ smoothing

struct SmoothingPoint {
  double kappa = 0.0;
  double width_factor = 0.0;
  int grid_size = 0;
  double ratio = 0.0;  ///< |rho_1 - mean|_{H^alpha} / |rho_0 - mean|_{L^1}
};

struct SmoothingResult {
  double alpha = 0.0;
  double predicted_exponent = 0.0;  ///< -(2 alpha + 2) / 4
  double fitted_exponent = 0.0;     ///< from the first width factor
  double exponent_ci = 0.0;
  LinearFit fit;
  std::vector<SmoothingPoint> points;
  /// largest relative ratio change between the first two width factors
  double width_sensitivity = 0.0;
};

SmoothingResult run_smoothing_scaling(const ExperimentConfig& cfg);
std::string smoothing_csv(const SmoothingResult& r);

// ------------------------------------------------------------------ other runs

struct SimulateResult {
  std::vector<DecayRun> runs;  ///< one per kappa, first seed
  std::vector<ScalarField> finals;
};

SimulateResult run_simulate(const ExperimentConfig& cfg);

/// kappa = 0 first when include_kappa_zero, then kappa_list.
std::vector<double> chain_kappas(const ExperimentConfig& cfg);

std::vector<DriftReport> run_drift_cert(const ExperimentConfig& cfg);

struct UlamGapRun {
  UlamChain chain;
  ContractionReport contraction;
};

std::vector<UlamGapRun> run_ulam_gap(const ExperimentConfig& cfg);
std::string ulam_gap_csv(const std::vector<UlamGapRun>& runs);

std::vector<LyapunovEstimate> run_exponent(const ExperimentConfig& cfg);
std::string exponent_csv(const ExperimentConfig& cfg, const std::vector<LyapunovEstimate>& est);

MomentTable run_correlations(const ExperimentConfig& cfg);
std::string moments_csv(const MomentTable& table);

}  // namespace shearmix
