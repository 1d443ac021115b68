#include "shearmix/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

#include "json.hpp"
#include "shearmix/io.hpp"

namespace shearmix {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// RNG stream ids per purpose, so experiments sharing a seed stay independent.
constexpr std::uint64_t kShiftStream = 11;
constexpr std::uint64_t kDriftStream = 21;
constexpr std::uint64_t kUlamStream = 31;
constexpr std::uint64_t kContractionStream = 32;
constexpr std::uint64_t kExponentStream = 41;
constexpr std::uint64_t kCorrelationStream = 51;

const std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::ed_verify, "ed_verify"},
    {ExperimentKind::mixing_sweep, "mixing_sweep"},
    {ExperimentKind::drift_cert, "drift_cert"},
    {ExperimentKind::ulam_gap, "ulam_gap"},
    {ExperimentKind::exponent, "exponent"},
    {ExperimentKind::correlations, "correlations"},
    {ExperimentKind::smoothing_scaling, "smoothing_scaling"},
};

std::string_view scheme_name(SplitScheme s) { return s == SplitScheme::strang ? "strang" : "pulsed"; }

SplitScheme parse_scheme(std::string_view s) {
  if (s == "strang") return SplitScheme::strang;
  if (s == "pulsed") return SplitScheme::pulsed;
  throw ConfigError("scheme must be \"strang\" or \"pulsed\", got \"" + std::string(s) + "\"");
}

std::string_view sign_name(DriftSign s) { return s == DriftSign::plus ? "plus" : "minus"; }

DriftSign parse_sign(std::string_view s) {
  if (s == "plus") return DriftSign::plus;
  if (s == "minus") return DriftSign::minus;
  throw ConfigError("drift_sign must be \"plus\" or \"minus\", got \"" + std::string(s) + "\"");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
  }
}

bool is_power_of_two_grid(int n) { return n >= 4 && std::has_single_bit(static_cast<unsigned>(n)); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

RngStream stream(std::uint64_t seed, std::uint64_t purpose) { return RngStream(seed, purpose); }

ShearSchedule schedule_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  return ShearSchedule{cfg.amplitude, cfg.profile, stream(seed, kShiftStream)};
}

int resolved_grid(const ExperimentConfig& cfg, double kappa) {
  return cfg.auto_resolve ? std::max(cfg.grid_size, required_grid_size(kappa, cfg.amplitude))
                          : cfg.grid_size;
}

CurveFit fit_curve(std::vector<double> x, std::vector<double> y) {
  CurveFit c;
  c.x = std::move(x);
  c.y = std::move(y);
  if (c.x.size() >= 4) {
    c.fit = linear_fit(c.x, c.y);
    c.valid = true;
  }
  return c;
}

json fit_json(const CurveFit& c) {
  json j = {{"valid", c.valid}, {"n_points", c.x.size()}, {"x", c.x}, {"y", c.y}};
  if (c.valid) {
    j["a"] = c.fit.intercept;
    j["b"] = c.fit.slope;
    j["r2"] = c.fit.r2;
    j["b_stderr"] = c.fit.slope_stderr;
    j["residuals"] = c.fit.residuals;
  }
  return j;
}

std::string csv_bool(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string_view to_string(ExperimentKind k) noexcept {
  for (const auto& [kind, name] : kKinds) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind parse_experiment(std::string_view name) {
  for (const auto& [kind, n] : kKinds) {
    if (n == name) return kind;
  }
  throw ConfigError("unknown experiment \"" + std::string(name) + "\"");
}

// ------------------------------------------------------------------ config

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");

  static const std::set<std::string> known = {
      "experiment", "amplitude", "profile", "kappa_list", "include_kappa_zero", "seeds",
      "output_dir", "grid_size", "auto_resolve", "split_substeps", "scheme", "n_periods",
      "delta_width", "epsilon", "n_max", "sources_per_axis", "alpha", "gamma", "q_list",
      "width_factors", "p", "s_star", "noise", "drift_sign", "sde_substeps", "shift_samples",
      "n_separations", "n_directions", "n_base_points", "n_outer_separations", "min_separation",
      "max_steps", "ulam_bins", "samples_per_bin", "beta_weight", "contraction_steps",
      "contraction_pairs", "n_steps", "n_samples", "n_particles", "n_realizations",
      "correlation_n_max", "modes"};
  for (const auto& [key, _] : j.items()) {
    require(known.count(key) == 1, "unknown config key \"" + key + "\"");
  }

  ExperimentConfig cfg;
  require(j.contains("experiment"), "config key \"experiment\" is required");
  std::string text_value;
  read(j, "experiment", text_value);
  cfg.experiment = parse_experiment(text_value);
  read(j, "amplitude", cfg.amplitude);
  if (j.contains("profile")) {
    read(j, "profile", text_value);
    try {
      cfg.profile = parse_profile(text_value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  read(j, "kappa_list", cfg.kappa_list);
  read(j, "include_kappa_zero", cfg.include_kappa_zero);
  read(j, "seeds", cfg.seeds);
  if (j.contains("output_dir")) {
    read(j, "output_dir", text_value);
    cfg.output_dir = text_value;
  }
  read(j, "grid_size", cfg.grid_size);
  read(j, "auto_resolve", cfg.auto_resolve);
  read(j, "split_substeps", cfg.split_substeps);
  if (j.contains("scheme")) {
    read(j, "scheme", text_value);
    cfg.scheme = parse_scheme(text_value);
  }
  read(j, "n_periods", cfg.n_periods);
  read(j, "delta_width", cfg.delta_width);
  read(j, "epsilon", cfg.epsilon);
  read(j, "n_max", cfg.n_max);
  read(j, "sources_per_axis", cfg.sources_per_axis);
  read(j, "alpha", cfg.alpha);
  read(j, "gamma", cfg.gamma);
  read(j, "q_list", cfg.q_list);
  read(j, "width_factors", cfg.width_factors);
  read(j, "p", cfg.lyapunov.p);
  read(j, "s_star", cfg.lyapunov.s_star);
  if (j.contains("noise")) {
    read(j, "noise", text_value);
    try {
      cfg.noise = parse_two_point_noise(text_value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("drift_sign")) {
    read(j, "drift_sign", text_value);
    cfg.drift_sign = parse_sign(text_value);
  }
  read(j, "sde_substeps", cfg.sde_substeps);
  read(j, "shift_samples", cfg.shift_samples);
  read(j, "n_separations", cfg.drift_grid.n_separations);
  read(j, "n_directions", cfg.drift_grid.n_directions);
  read(j, "n_base_points", cfg.drift_grid.n_base_points);
  read(j, "n_outer_separations", cfg.drift_grid.n_outer_separations);
  read(j, "min_separation", cfg.drift_grid.min_separation);
  read(j, "max_steps", cfg.max_steps);
  read(j, "ulam_bins", cfg.ulam_bins);
  read(j, "samples_per_bin", cfg.samples_per_bin);
  read(j, "beta_weight", cfg.beta_weight);
  read(j, "contraction_steps", cfg.contraction_steps);
  read(j, "contraction_pairs", cfg.contraction_pairs);
  read(j, "n_steps", cfg.n_steps);
  read(j, "n_samples", cfg.n_samples);
  read(j, "n_particles", cfg.n_particles);
  read(j, "n_realizations", cfg.n_realizations);
  read(j, "correlation_n_max", cfg.correlation_n_max);
  if (j.contains("modes")) {
    require(j["modes"].is_array(), "config key \"modes\" must be an array");
    cfg.modes.clear();
    for (const auto& m : j["modes"]) {
      ModePair mp;
      try {
        mp.m = m.at("m").get<std::array<int, 2>>();
        mp.mp = m.at("m_prime").get<std::array<int, 2>>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config key \"modes\": ") + e.what());
      }
      cfg.modes.push_back(mp);
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError("config file not found: " + path.string());
  }
  return from_json(read_text_file(path));
}

void ExperimentConfig::validate() const {
  require(std::isfinite(amplitude), "amplitude must be finite");
  require(!seeds.empty(), "seeds must list at least one explicit seed");
  const bool needs_kappa = experiment != ExperimentKind::exponent &&
                           !((experiment == ExperimentKind::drift_cert ||
                              experiment == ExperimentKind::ulam_gap) &&
                             include_kappa_zero);
  require(!needs_kappa || !kappa_list.empty(), "kappa_list must not be empty");
  for (std::size_t i = 0; i < kappa_list.size(); ++i) {
    require(std::isfinite(kappa_list[i]) && kappa_list[i] > 0.0,
            "kappa_list entries must be finite and > 0");
    require(i == 0 || kappa_list[i] < kappa_list[i - 1], "kappa_list must be strictly descending");
  }
  require(is_power_of_two_grid(grid_size), "grid_size must be a power of two >= 4");
  require(split_substeps >= 1, "split_substeps must be >= 1");
  require(n_periods >= 1, "n_periods must be >= 1");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(n_max >= 1, "n_max must be >= 1");
  require(sources_per_axis >= 1, "sources_per_axis must be >= 1");
  require(alpha >= 0.0, "alpha must be >= 0");
  require(!q_list.empty(), "q_list must not be empty");
  for (double q : q_list) require(q >= 0.0, "q_list entries must be >= 0");
  require(!width_factors.empty(), "width_factors must not be empty");
  for (double w : width_factors) require(w > 0.0, "width_factors entries must be > 0");
  try {
    lyapunov.validate();
    drift_grid.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(sde_substeps >= 1, "sde_substeps must be >= 1");
  require(shift_samples >= 1000, "shift_samples must be >= 1000");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(ulam_bins >= 8 && ulam_bins % 2 == 0, "ulam_bins must be even and >= 8");
  require(samples_per_bin >= 1000, "samples_per_bin must be >= 1000");
  require(beta_weight >= 0.0, "beta_weight must be >= 0");
  require(contraction_steps >= 1, "contraction_steps must be >= 1");
  require(contraction_pairs >= 100, "contraction_pairs must be >= 100");
  require(n_steps >= 100, "n_steps must be >= 100");
  require(n_samples >= 10, "n_samples must be >= 10");
  require(n_particles >= 10000, "n_particles must be >= 10000");
  require(n_realizations >= (experiment == ExperimentKind::correlations ? 50 : 1),
          "n_realizations must be >= 50 for correlations");
  require(correlation_n_max >= 1, "correlation_n_max must be >= 1");
  require(!modes.empty(), "modes must not be empty");
  for (const auto& m : modes) {
    require(!(m.m[0] == 0 && m.m[1] == 0) && !(m.mp[0] == 0 && m.mp[1] == 0),
            "modes must be nonzero");
  }
}

std::string ExperimentConfig::to_json() const {
  json modes_json = json::array();
  for (const auto& m : modes) modes_json.push_back({{"m", m.m}, {"m_prime", m.mp}});
  json j = {
      {"experiment", std::string(to_string(experiment))},
      {"amplitude", amplitude},
      {"profile", std::string(shearmix::to_string(profile))},
      {"kappa_list", kappa_list},
      {"include_kappa_zero", include_kappa_zero},
      {"seeds", seeds},
      {"output_dir", output_dir.string()},
      {"grid_size", grid_size},
      {"auto_resolve", auto_resolve},
      {"split_substeps", split_substeps},
      {"scheme", std::string(scheme_name(scheme))},
      {"n_periods", n_periods},
      {"delta_width", delta_width},
      {"epsilon", epsilon},
      {"n_max", n_max},
      {"sources_per_axis", sources_per_axis},
      {"alpha", alpha},
      {"gamma", gamma},
      {"q_list", q_list},
      {"width_factors", width_factors},
      {"p", lyapunov.p},
      {"s_star", lyapunov.s_star},
      {"noise", std::string(shearmix::to_string(noise))},
      {"drift_sign", std::string(sign_name(drift_sign))},
      {"sde_substeps", sde_substeps},
      {"shift_samples", shift_samples},
      {"n_separations", drift_grid.n_separations},
      {"n_directions", drift_grid.n_directions},
      {"n_base_points", drift_grid.n_base_points},
      {"n_outer_separations", drift_grid.n_outer_separations},
      {"min_separation", drift_grid.min_separation},
      {"max_steps", max_steps},
      {"ulam_bins", ulam_bins},
      {"samples_per_bin", samples_per_bin},
      {"beta_weight", beta_weight},
      {"contraction_steps", contraction_steps},
      {"contraction_pairs", contraction_pairs},
      {"n_steps", n_steps},
      {"n_samples", n_samples},
      {"n_particles", n_particles},
      {"n_realizations", n_realizations},
      {"correlation_n_max", correlation_n_max},
      {"modes", modes_json},
  };
  return j.dump(2);
}

TwoPointDynamics ExperimentConfig::dynamics(double kappa) const {
  return {kappa, sde_substeps, drift_sign, noise, profile};
}

// ------------------------------------------------------------------ mixing

double heat_mixing_periods(double kappa, double sigma, double epsilon) {
  // sup |p_t - 1| = theta(a)^2 - 1 with theta(a) = sum_k exp(-a k^2) and
  // a = 2 pi^2 sigma^2 + 4 pi^2 kappa t.
  auto gap = [&](double t) {
    const double a = 2.0 * kPi * kPi * sigma * sigma + 4.0 * kPi * kPi * kappa * t;
    double theta = 1.0;
    for (int k = 1; k < 200; ++k) {
      const double term = 2.0 * std::exp(-a * k * k);
      theta += term;
      if (term < 1e-18) break;
    }
    return theta * theta - 1.0;
  };
  if (gap(0.0) < epsilon) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (gap(hi) >= epsilon) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) >= epsilon ? lo : hi) = mid;
  }
  return 0.5 * hi;
}

MixingCurve run_mixing_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  MixingCurve curve;
  curve.amplitude = cfg.amplitude;
  curve.epsilon = cfg.epsilon;
  for (double kappa : cfg.kappa_list) {
    MixingPoint pt;
    pt.kappa = kappa;
    pt.grid_size = resolved_grid(cfg, kappa);
    pt.underresolved = !is_resolved(pt.grid_size, kappa, cfg.amplitude);
    const MixingOptions opts{pt.grid_size, cfg.split_substeps, cfg.scheme, cfg.sources_per_axis};
    RunningStats st;
    for (std::uint64_t seed : cfg.seeds) {
      const MixingTimeResult r =
          mixing_time(kappa, schedule_for(cfg, seed), cfg.epsilon, cfg.delta_width, cfg.n_max, opts);
      pt.t_mix_per_seed.push_back(r.t_mix);
      if (r.t_mix != MixingTimeResult::kNotMixed) st.add(r.t_mix);
    }
    pt.t_mix = st.count() > 0 ? st.mean() : static_cast<double>(MixingTimeResult::kNotMixed);
    const double sigma =
        cfg.delta_width > 0.0 ? cfg.delta_width : surrogate_width(pt.grid_size, kappa);
    pt.t_heat = heat_mixing_periods(kappa, sigma, cfg.epsilon);
    if (pt.underresolved) {
      pt.excluded_reason = "underresolved grid";
    } else if (st.count() < cfg.seeds.size()) {
      pt.excluded_reason = "not mixed within n_max for some seed";
    }
    curve.points.push_back(pt);
  }
  // Integer-period quantization dominates a mixing time of one or two periods.
  if (!curve.points.empty() && curve.points.front().excluded_reason.empty() &&
      curve.points.front().t_mix <= 2.0) {
    curve.points.front().excluded_reason = "t_mix <= 2 periods";
  }
  std::vector<double> lx, ix, y;
  for (auto& pt : curve.points) {
    if (!pt.excluded_reason.empty()) {
      curve.warnings.push_back("kappa " + format_double(pt.kappa) + " excluded: " + pt.excluded_reason);
      continue;
    }
    pt.used_in_fit = true;
    lx.push_back(std::log(1.0 / pt.kappa));
    ix.push_back(1.0 / pt.kappa);
    y.push_back(pt.t_mix);
  }
  curve.log_fit = fit_curve(lx, y);
  curve.inverse_fit = fit_curve(ix, y);
  if (!curve.log_fit.valid) curve.warnings.push_back("fewer than 4 usable kappa points; no fit");
  return curve;
}

std::string mixing_curve_csv(const MixingCurve& curve) {
  std::string out = "kappa,grid_size,underresolved,t_mix,t_heat,used_in_fit,t_mix_per_seed\n";
  for (const auto& pt : curve.points) {
    std::string seeds;
    for (std::size_t i = 0; i < pt.t_mix_per_seed.size(); ++i) {
      if (i) seeds += ';';
      seeds += std::to_string(pt.t_mix_per_seed[i]);
    }
    out += format_double(pt.kappa) + ',' + std::to_string(pt.grid_size) + ',' +
           csv_bool(pt.underresolved) + ',' + format_double(pt.t_mix) + ',' +
           format_double(pt.t_heat) + ',' + csv_bool(pt.used_in_fit) + ',' + seeds + '\n';
  }
  return out;
}

std::string mixing_fit_json(const MixingCurve& curve) {
  json excluded = json::array();
  for (const auto& pt : curve.points) {
    if (!pt.excluded_reason.empty()) {
      excluded.push_back({{"kappa", pt.kappa}, {"reason", pt.excluded_reason}});
    }
  }
  json j = {{"amplitude", curve.amplitude},
            {"epsilon", curve.epsilon},
            {"model_log", "t_mix = a + b ln(1/kappa)"},
            {"log_fit", fit_json(curve.log_fit)},
            {"model_inverse", "t_mix = a + b / kappa"},
            {"inverse_fit", fit_json(curve.inverse_fit)},
            {"excluded", excluded},
            {"warnings", curve.warnings}};
  return j.dump(2);
}

// ------------------------------------------------------------------ ed_verify

double ed_prefactor(std::span<const double> linf, double l1_initial, double gamma, double kappa,
                    double alpha) {
  if (!(l1_initial > 0.0)) throw std::invalid_argument("ed_prefactor: l1_initial must be > 0");
  double best = 0.0;
  for (std::size_t n = 0; n < linf.size(); ++n) {
    best = std::max(best, linf[n] * std::exp(gamma * static_cast<double>(n)));
  }
  return best * std::pow(kappa, 1.0 + alpha) / l1_initial;
}

double fit_linf_rate(const NormSeries& series) {
  if (series.size() < 3) return 0.0;
  const double start = series.linf.front();
  std::vector<double> x, y;
  for (std::size_t n = 1; n < series.size(); ++n) {
    const double v = series.linf[n];
    if (v < 0.5 * start && v > 1e-13 * std::max(start, 1.0)) {
      x.push_back(static_cast<double>(n));
      y.push_back(std::log(v));
    }
  }
  if (x.size() < 3) return 0.0;
  return std::max(0.0, -linear_fit(x, y).slope);
}

EdVerifyResult run_ed_verify(const ExperimentConfig& cfg) {
  cfg.validate();
  EdVerifyResult result;
  result.alpha = cfg.alpha;
  if (cfg.alpha == 0.0) {
    result.warnings.push_back("alpha = 0: the prefactor is not expected to be uniform in kappa");
  }

  struct Job {
    std::uint64_t seed;
    double kappa;
    NormSeries series;
  };
  std::vector<Job> jobs;
  for (double kappa : cfg.kappa_list) {
    const int n = resolved_grid(cfg, kappa);
    const double sigma = cfg.delta_width > 0.0 ? cfg.delta_width : surrogate_width(n, kappa);
    const ScalarField rho0 = gaussian_bump(n, {0.5, 0.5}, sigma);
    for (std::uint64_t seed : cfg.seeds) {
      DecayRun run = decay_run(rho0, schedule_for(cfg, seed), kappa, cfg.n_periods,
                               cfg.split_substeps, cfg.alpha, cfg.scheme);
      if (run.underresolved) {
        result.warnings.push_back("underresolved grid at kappa " + format_double(kappa));
      }
      jobs.push_back({seed, kappa, std::move(run.series)});
    }
  }

  if (cfg.gamma > 0.0) {
    result.gamma = cfg.gamma;
  } else {
    const double smallest = cfg.kappa_list.back();
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& job : jobs) {
      if (job.kappa == smallest) rate = std::min(rate, fit_linf_rate(job.series));
    }
    result.gamma = std::isfinite(rate) ? rate : 0.0;
    result.gamma_fitted = true;
    if (result.gamma == 0.0) result.warnings.push_back("no decay resolved; gamma = 0");
  }

  for (const auto& job : jobs) {
    EdRun run{job.seed, job.kappa, 0.0, false, {}};
    if (!(job.series.linf.back() < job.series.linf.front())) {
      run.excluded = true;
      run.diagnostic = "sup norm did not decay over the run";
    } else {
      run.D_hat = ed_prefactor(job.series.linf, job.series.l1.front(), result.gamma, job.kappa,
                               cfg.alpha);
    }
    result.runs.push_back(run);
  }

  for (double kappa : cfg.kappa_list) {
    for (double q : cfg.q_list) {
      RunningStats st;
      for (const auto& r : result.runs) {
        if (r.kappa == kappa && !r.excluded) st.add(q == 0.0 ? 1.0 : std::pow(r.D_hat, q));
      }
      result.moments.push_back({kappa, q, st.mean(), st.sem()});
    }
  }
  for (std::size_t a = 0; a < result.moments.size(); ++a) {
    for (std::size_t b = a + 1; b < result.moments.size(); ++b) {
      const auto& ma = result.moments[a];
      const auto& mb = result.moments[b];
      if (ma.q != mb.q) continue;
      const double se = std::hypot(ma.sem, mb.sem);
      if (std::abs(ma.mean - mb.mean) > 2.0 * se) result.kappa_trend = true;
    }
  }
  return result;
}

std::string ed_runs_csv(const EdVerifyResult& r) {
  std::string out = "seed,kappa,d_hat,excluded,diagnostic\n";
  for (const auto& run : r.runs) {
    out += std::to_string(run.seed) + ',' + format_double(run.kappa) + ',' +
           format_double(run.D_hat) + ',' + csv_bool(run.excluded) + ',' + run.diagnostic + '\n';
  }
  return out;
}

std::string ed_moments_csv(const EdVerifyResult& r) {
  std::string out = "kappa,q,mean,sem\n";
  for (const auto& m : r.moments) {
    out += format_double(m.kappa) + ',' + format_double(m.q) + ',' + format_double(m.mean) + ',' +
           format_double(m.sem) + '\n';
  }
  return out;
}

// ------------------------------------------------------------------ smoothing

SmoothingResult run_smoothing_scaling(const ExperimentConfig& cfg) {
  cfg.validate();
  SmoothingResult result;
  result.alpha = cfg.alpha;
  result.predicted_exponent = -(2.0 * cfg.alpha + 2.0) / 4.0;
  const ShearSchedule schedule = schedule_for(cfg, cfg.seeds.front());

  for (double w : cfg.width_factors) {
    for (double kappa : cfg.kappa_list) {
      const double sigma = w * std::sqrt(kappa);
      // The Gaussian is resolved once its Nyquist coefficient is below e^-32.
      int n = resolved_grid(cfg, kappa);
      while (n * sigma < 2.6) n *= 2;
      const ScalarField rho0 = gaussian_bump(n, {0.5, 0.5}, sigma);
      const ScalarField rho1 = unit_step(rho0, schedule.shift(0), Axis::horizontal, kappa,
                                         cfg.amplitude, cfg.profile, cfg.split_substeps, cfg.scheme);
      const double l1 = norms(rho0).l1;
      result.points.push_back({kappa, w, n, sobolev_norm(rho1, cfg.alpha) / l1});
    }
  }

  const std::size_t nk = cfg.kappa_list.size();
  if (nk >= 2) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < nk; ++i) {
      x.push_back(std::log(result.points[i].kappa));
      y.push_back(std::log(result.points[i].ratio));
    }
    result.fit = linear_fit(x, y);
    result.fitted_exponent = result.fit.slope;
    result.exponent_ci = kZ95 * result.fit.slope_stderr;
  }
  if (cfg.width_factors.size() >= 2) {
    for (std::size_t i = 0; i < nk; ++i) {
      const double change = std::abs(result.points[nk + i].ratio / result.points[i].ratio - 1.0);
      result.width_sensitivity = std::max(result.width_sensitivity, change);
    }
  }
  return result;
}

std::string smoothing_csv(const SmoothingResult& r) {
  std::string out = "kappa,width_factor,grid_size,ratio\n";
  for (const auto& p : r.points) {
    out += format_double(p.kappa) + ',' + format_double(p.width_factor) + ',' +
           std::to_string(p.grid_size) + ',' + format_double(p.ratio) + '\n';
  }
  return out;
}

// ------------------------------------------------------------------ other runs

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  SimulateResult result;
  const ShearSchedule schedule = schedule_for(cfg, cfg.seeds.front());
  const double orders[1] = {cfg.alpha};
  for (double kappa : cfg.kappa_list) {
    const int n = resolved_grid(cfg, kappa);
    const double sigma = cfg.delta_width > 0.0 ? cfg.delta_width : surrogate_width(n, kappa);
    ScalarField rho = gaussian_bump(n, {0.5, 0.5}, sigma);
    DecayRun run;
    run.underresolved = !is_resolved(n, kappa, cfg.amplitude);
    run.series.sobolev_order = cfg.alpha;
    NormEntry e = norms(rho, orders);
    run.series.push(e);
    for (int p = 0; p < cfg.n_periods; ++p) {
      const auto [ze, zo] = schedule.period_shifts(static_cast<std::uint64_t>(p));
      rho = period_step(rho, ze, zo, kappa, cfg.amplitude, cfg.profile, cfg.split_substeps,
                        cfg.scheme);
      e = norms(rho, orders);
      e.t = 2.0 * (p + 1);
      run.series.push(e);
    }
    result.runs.push_back(std::move(run));
    result.finals.push_back(std::move(rho));
  }
  return result;
}

std::vector<double> chain_kappas(const ExperimentConfig& cfg) {
  std::vector<double> out;
  if (cfg.include_kappa_zero) out.push_back(0.0);
  out.insert(out.end(), cfg.kappa_list.begin(), cfg.kappa_list.end());
  return out;
}

std::vector<DriftReport> run_drift_cert(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<DriftReport> out;
  const RngStream rng = stream(cfg.seeds.front(), kDriftStream);
  for (double kappa : chain_kappas(cfg)) {
    out.push_back(drift_certificate(cfg.amplitude, cfg.lyapunov, cfg.dynamics(kappa),
                                    cfg.drift_grid, cfg.shift_samples, rng, cfg.max_steps));
  }
  return out;
}

std::vector<UlamGapRun> run_ulam_gap(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<UlamGapRun> out;
  for (double kappa : chain_kappas(cfg)) {
    UlamGapRun run;
    run.chain = ulam_build(cfg.amplitude, cfg.dynamics(kappa), cfg.ulam_bins, cfg.samples_per_bin,
                           stream(cfg.seeds.front(), kUlamStream));
    run.contraction = contraction_factor(run.chain, cfg.lyapunov, cfg.beta_weight,
                                         cfg.contraction_steps,
                                         stream(cfg.seeds.front(), kContractionStream),
                                         cfg.contraction_pairs);
    out.push_back(std::move(run));
  }
  return out;
}

std::string ulam_gap_csv(const std::vector<UlamGapRun>& runs) {
  std::string out =
      "kappa,m,samples_per_bin,alpha_bar_hat,second_eigenvalue,spectral_gap,converged,iterations\n";
  for (const auto& r : runs) {
    out += format_double(r.chain.kappa) + ',' + std::to_string(r.chain.m) + ',' +
           std::to_string(r.chain.samples_per_bin) + ',' +
           format_double(r.contraction.alpha_bar_hat) + ',' +
           format_double(r.contraction.second_eigenvalue) + ',' +
           format_double(r.contraction.spectral_gap) + ',' + csv_bool(r.contraction.converged) +
           ',' + std::to_string(r.contraction.iterations) + '\n';
  }
  return out;
}

std::vector<LyapunovEstimate> run_exponent(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<LyapunovEstimate> out;
  for (std::uint64_t seed : cfg.seeds) {
    out.push_back(lyapunov_exponent(cfg.amplitude, cfg.profile, cfg.n_steps, cfg.n_samples,
                                    stream(seed, kExponentStream)));
  }
  return out;
}

std::string exponent_csv(const ExperimentConfig& cfg, const std::vector<LyapunovEstimate>& est) {
  std::string out = "seed,amplitude,profile,estimate,ci95\n";
  for (std::size_t i = 0; i < est.size(); ++i) {
    out += std::to_string(cfg.seeds[i]) + ',' + format_double(cfg.amplitude) + ',' +
           std::string(shearmix::to_string(cfg.profile)) + ',' + format_double(est[i].estimate) +
           ',' + format_double(est[i].ci95) + '\n';
  }
  return out;
}

MomentTable run_correlations(const ExperimentConfig& cfg) {
  cfg.validate();
  CorrelationOptions opts;
  opts.substeps = cfg.sde_substeps;
  opts.drift_sign = cfg.drift_sign;
  opts.profile = cfg.profile;
  opts.zeta = cfg.gamma > 0.0 ? cfg.gamma / 3.0 : 0.0;
  return dkappa_moments(cfg.q_list, cfg.kappa_list, cfg.n_realizations,
                        stream(cfg.seeds.front(), kCorrelationStream), cfg.amplitude, cfg.modes,
                        cfg.correlation_n_max, cfg.n_particles, opts);
}

std::string moments_csv(const MomentTable& table) {
  std::string out = "kappa,q,mean,sem\n";
  for (const auto& r : table.rows) {
    out += format_double(r.kappa) + ',' + format_double(r.q) + ',' + format_double(r.mean) + ',' +
           format_double(r.sem) + '\n';
  }
  return out;
}

}  // namespace shearmix
