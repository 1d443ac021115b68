#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "shearmix/harris.hpp"
#include "shearmix/parallel.hpp"

namespace shearmix {

using nlohmann::json;

void LyapunovParams::validate() const {
  if (!(p > 0.0 && p <= 0.25)) throw std::invalid_argument("LyapunovParams: p must lie in (0, 1/4]");
  if (!(s_star > 0.0 && s_star < 0.5)) {
    throw std::invalid_argument("LyapunovParams: s_star must lie in (0, 1/2)");
  }
}

double LyapunovParams::floor_value() const { return std::pow(s_star, -p); }

double lyapunov_V(const Displacement& sep, const LyapunovParams& params) {
  const double d = norm_linf(sep);
  if (d == 0.0) throw InvalidState("lyapunov_V: coincident points");
  return std::pow(std::min(d, params.s_star), -params.p);
}

double lyapunov_V(const TwoPointState& s, const LyapunovParams& params) {
  if (s.x == s.y) throw InvalidState("lyapunov_V: coincident points");
  return lyapunov_V(displacement(s.x, s.y), params);
}

// ------------------------------------------------------------------ dynamics

void TwoPointDynamics::validate() const {
  sde().validate();
}

std::string_view to_string(TwoPointNoise n) noexcept {
  return n == TwoPointNoise::common_sde ? "common_sde" : "pulsed_independent";
}

TwoPointNoise parse_two_point_noise(std::string_view name) {
  if (name == "common_sde") return TwoPointNoise::common_sde;
  if (name == "pulsed_independent") return TwoPointNoise::pulsed_independent;
  throw std::invalid_argument("unknown two-point noise: " + std::string(name));
}

SeparatedPair two_point_chain_step(const SeparatedPair& p, double zeta_even, double zeta_odd,
                                   double amplitude, const TwoPointDynamics& dyn,
                                   RngStream& noise) {
  const double amp = dyn.sde().signed_amplitude(amplitude);
  if (dyn.kappa == 0.0) return pair_double_step(p, zeta_even, zeta_odd, amp, dyn.profile);
  if (dyn.noise == TwoPointNoise::pulsed_independent) {
    return pair_pulsed_independent_step(p, zeta_even, zeta_odd, amp, dyn.profile, dyn.kappa,
                                        noise);
  }
  return pair_sde_double_step(p, zeta_even, zeta_odd, amplitude, dyn.profile, dyn.sde(), noise);
}

TwoPointState two_point_chain_step(const TwoPointState& s, double zeta_even, double zeta_odd,
                                   double amplitude, const TwoPointDynamics& dyn,
                                   RngStream& noise) {
  const double amp = dyn.sde().signed_amplitude(amplitude);
  if (dyn.kappa == 0.0) return two_point_step(s, zeta_even, zeta_odd, amp, dyn.profile);
  if (dyn.noise == TwoPointNoise::pulsed_independent) {
    if (s.x == s.y) throw InvalidState("two_point_chain_step: coincident points");
    RngStream kx = noise.substream(noise());
    RngStream ky = noise.substream(noise());
    return {pulsed_step(s.x, zeta_even, zeta_odd, amp, dyn.profile, dyn.kappa, kx),
            pulsed_step(s.y, zeta_even, zeta_odd, amp, dyn.profile, dyn.kappa, ky)};
  }
  return two_point_sde_step(s, zeta_even, zeta_odd, amplitude, dyn.profile, dyn.sde(), noise);
}

SeparatedPair two_point_chain_step(const SeparatedPair& p, double amplitude,
                                   const TwoPointDynamics& dyn, RngStream& rng) {
  const double ze = rng.uniform();
  const double zo = rng.uniform();
  return two_point_chain_step(p, ze, zo, amplitude, dyn, rng);
}

Displacement separation_chain_step(const Displacement& d, double amplitude,
                                   const TwoPointDynamics& dyn, RngStream& rng) {
  const double amp = dyn.sde().signed_amplitude(amplitude);
  SeparatedPair p{{0.0, 0.0}, d};
  for (Axis axis : {Axis::horizontal, Axis::vertical}) {
    const double phase = rng.uniform();
    p.base = {phase, phase};
    if (dyn.kappa > 0.0 && dyn.noise == TwoPointNoise::common_sde) {
      const BrownianPath path = sample_brownian_path(dyn.substeps, rng);
      p = pair_sde_unit_step(p, 0.0, axis, amplitude, dyn.profile, dyn.sde(), path);
    } else {
      p = pair_shear_step(p, 0.0, axis, amp, dyn.profile);
      if (dyn.kappa > 0.0) {
        const Displacement kx = wrapped_gaussian(dyn.kappa, rng);
        const Displacement ky = wrapped_gaussian(dyn.kappa, rng);
        p.sep = {wrap_centered(p.sep.d1 + ky.d1 - kx.d1), wrap_centered(p.sep.d2 + ky.d2 - kx.d2)};
      }
    }
  }
  return p.sep;
}

// ------------------------------------------------------------------ drift

namespace {

RunningStats ratio_samples(const SeparatedPair& start, double amplitude,
                           const LyapunovParams& params, const TwoPointDynamics& dyn,
                           std::size_t begin, std::size_t end, const RngStream& rng, int steps) {
  const double v0 = lyapunov_V(start.sep, params);
  RunningStats stats;
  for (std::size_t k = begin; k < end; ++k) {
    RngStream r = rng.substream(k);
    SeparatedPair p = start;
    for (int s = 0; s < steps; ++s) p = two_point_chain_step(p, amplitude, dyn, r);
    stats.add(lyapunov_V(p.sep, params) / v0);
  }
  return stats;
}

void check_drift_args(const LyapunovParams& params, const TwoPointDynamics& dyn,
                      int n_shift_samples, int steps) {
  params.validate();
  dyn.validate();
  if (n_shift_samples < 1000) throw std::invalid_argument("drift: n_shift_samples must be >= 1000");
  if (steps < 1) throw std::invalid_argument("drift: steps must be >= 1");
}

TorusPoint representative_base(int k, int count) {
  // Golden-ratio offsets spread the second coordinate.
  const double x2 = wrap_unit(0.5 + k * std::numbers::phi);
  return {(k + 0.5) / count, x2};
}

Displacement direction_vector(double length, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double scale = length / std::max(std::abs(c), std::abs(s));
  return {wrap_centered(c * scale), wrap_centered(s * scale)};
}

std::vector<DriftCell> make_cells(std::span<const double> separations, const DriftGridSpec& grid) {
  std::vector<DriftCell> cells;
  for (double sep : separations) {
    for (int j = 0; j < grid.n_directions; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / grid.n_directions;
      for (int b = 0; b < grid.n_base_points; ++b) {
        cells.push_back({sep, angle, representative_base(b, grid.n_base_points), 0.0, 0.0});
      }
    }
  }
  return cells;
}

void evaluate_cells(std::vector<DriftCell>& cells, double amplitude, const LyapunovParams& params,
                    const TwoPointDynamics& dyn, int n, const RngStream& rng, int steps) {
  parallel_for(cells.size(), [&](std::size_t c) {
    DriftCell& cell = cells[c];
    const SeparatedPair start{cell.base, direction_vector(cell.separation, cell.angle)};
    const RunningStats st = ratio_samples(start, amplitude, params, dyn, 0,
                                          static_cast<std::size_t>(n), rng.substream(c), steps);
    cell.ratio = st.mean();
    cell.ci = st.ci95();
  });
}

std::vector<double> inner_separations(const LyapunovParams& params, const DriftGridSpec& grid) {
  std::vector<double> out;
  const double lo = std::log(grid.min_separation);
  const double hi = std::log(params.s_star);
  for (int i = 0; i < grid.n_separations; ++i) {
    out.push_back(std::exp(lo + (hi - lo) * i / grid.n_separations));
  }
  return out;
}

const DriftCell& worst_upper(const std::vector<DriftCell>& cells) {
  return *std::max_element(cells.begin(), cells.end(), [](const DriftCell& a, const DriftCell& b) {
    return a.ratio + a.ci < b.ratio + b.ci;
  });
}

json cell_json(const DriftCell& c) {
  return {{"separation", c.separation}, {"angle", c.angle}, {"base", {c.base.x1, c.base.x2}},
          {"ratio", c.ratio},           {"ci", c.ci}};
}

}  // namespace

RatioEstimate drift_ratio(const SeparatedPair& start, double amplitude,
                          const LyapunovParams& params, const TwoPointDynamics& dyn,
                          int n_shift_samples, const RngStream& rng, int steps) {
  check_drift_args(params, dyn, n_shift_samples, steps);
  constexpr std::size_t kBlock = 256;
  const std::size_t n = static_cast<std::size_t>(n_shift_samples);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<RunningStats> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    partial[b] = ratio_samples(start, amplitude, params, dyn, b * kBlock,
                               std::min(n, (b + 1) * kBlock), rng, steps);
  });
  RunningStats total;
  for (const auto& p : partial) total.merge(p);
  return {total.mean(), total.ci95()};
}

RatioEstimate drift_ratio(const TwoPointState& start, double amplitude,
                          const LyapunovParams& params, const TwoPointDynamics& dyn,
                          int n_shift_samples, const RngStream& rng, int steps) {
  if (start.x == start.y) throw InvalidState("drift_ratio: coincident points");
  return drift_ratio(SeparatedPair::from_state(start), amplitude, params, dyn, n_shift_samples,
                     rng, steps);
}

void DriftGridSpec::validate() const {
  if (n_separations < 1 || n_directions < 1 || n_base_points < 1 || n_outer_separations < 2) {
    throw std::invalid_argument("DriftGridSpec: counts must be positive (outer >= 2)");
  }
  if (!(min_separation > 0.0)) throw std::invalid_argument("DriftGridSpec: min_separation must be > 0");
}

std::vector<DriftCell> drift_cells(double amplitude, const LyapunovParams& params,
                                   const TwoPointDynamics& dyn, const DriftGridSpec& grid,
                                   int n_shift_samples, const RngStream& rng, int steps) {
  check_drift_args(params, dyn, n_shift_samples, steps);
  grid.validate();
  auto cells = make_cells(inner_separations(params, grid), grid);
  evaluate_cells(cells, amplitude, params, dyn, n_shift_samples,
                 rng.substream(static_cast<std::uint64_t>(steps)), steps);
  return cells;
}

DriftReport drift_certificate(double amplitude, const LyapunovParams& params,
                              const TwoPointDynamics& dyn, const DriftGridSpec& grid,
                              int n_shift_samples, const RngStream& rng, int max_steps) {
  DriftReport report;
  report.amplitude = amplitude;
  report.params = params;
  report.dynamics = dyn;
  report.kappa = dyn.kappa;
  report.n_shift_samples = n_shift_samples;

  report.cells = drift_cells(amplitude, params, dyn, grid, n_shift_samples, rng, 1);
  const DriftCell& worst = worst_upper(report.cells);
  report.worst_cell = worst;
  report.beta_hat = worst.ratio;
  report.beta_ci = worst.ci;
  report.pass = report.beta_hat + report.beta_ci < 1.0;

  std::vector<double> outer;
  for (int i = 0; i < grid.n_outer_separations; ++i) {
    outer.push_back(params.s_star + (0.5 - params.s_star) * i / (grid.n_outer_separations - 1));
  }
  auto outer_cells = make_cells(outer, grid);
  evaluate_cells(outer_cells, amplitude, params, dyn, n_shift_samples, rng.substream(1000), 1);
  const DriftCell& k_cell = worst_upper(outer_cells);
  report.K_hat = k_cell.ratio * params.floor_value();
  report.K_ci = k_cell.ci * params.floor_value();

  if (!report.pass) {
    for (int l = 2; l <= max_steps; ++l) {
      const auto cells = drift_cells(amplitude, params, dyn, grid, n_shift_samples, rng, l);
      const DriftCell& w = worst_upper(cells);
      report.multi_step.push_back({l, w.ratio, w.ci, w.ratio + w.ci < 1.0});
    }
  }
  return report;
}

std::string DriftReport::to_json() const {
  json j;
  j["amplitude"] = amplitude;
  j["p"] = params.p;
  j["s_star"] = params.s_star;
  j["kappa"] = kappa;
  j["noise"] = std::string(to_string(dynamics.noise));
  j["drift_sign"] = dynamics.drift_sign == DriftSign::plus ? "plus" : "minus";
  j["substeps"] = dynamics.substeps;
  j["profile"] = std::string(to_string(dynamics.profile));
  j["n_shift_samples"] = n_shift_samples;
  j["beta_hat"] = beta_hat;
  j["beta_ci"] = beta_ci;
  j["worst_cell"] = cell_json(worst_cell);
  j["K_hat"] = K_hat;
  j["K_ci"] = K_ci;
  j["pass"] = pass;
  json ms = json::array();
  for (const auto& s : multi_step) {
    ms.push_back({{"steps", s.steps}, {"beta_hat", s.beta_hat}, {"beta_ci", s.beta_ci},
                  {"pass", s.pass}});
  }
  j["multi_step"] = ms;
  json cs = json::array();
  for (const auto& c : cells) cs.push_back(cell_json(c));
  j["cells"] = cs;
  return j.dump(2);
}

// ------------------------------------------------------------------ minorization

bool SeparationBox::contains(const Displacement& d) const noexcept {
  return d.d1 >= d1_lo && d.d1 < d1_hi && d.d2 >= d2_lo && d.d2 < d2_hi &&
         norm_linf(d) >= min_linf;
}

bool SeparationBox::empty() const noexcept {
  if (!(d1_lo < d1_hi && d2_lo < d2_hi) || min_linf > 0.5) return true;
  // The box misses the annulus only if it sits strictly inside |d|_inf < min_linf.
  const double reach = std::max({std::abs(d1_lo), std::abs(d1_hi), std::abs(d2_lo), std::abs(d2_hi)});
  return reach <= min_linf;
}

std::vector<TwoPointState> sample_sublevel_starts(const LyapunovParams& params, double R,
                                                  int count, const RngStream& rng) {
  params.validate();
  if (R < params.floor_value()) {
    throw std::invalid_argument("sample_sublevel_starts: sublevel set {V <= R} is empty");
  }
  const double r_min = std::pow(R, -1.0 / params.p);
  RngStream r = rng;
  std::vector<TwoPointState> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const TorusPoint x = uniform_point(r);
    const Displacement d{r.uniform() - 0.5, r.uniform() - 0.5};
    if (norm_linf(d) < r_min || norm_linf(d) == 0.0) continue;
    out.push_back({x, translate(x, d)});
  }
  return out;
}

MinorizationResult minorization_estimate(std::span<const TwoPointState> starts, int l,
                                         const SeparationBox& target, double amplitude,
                                         const TwoPointDynamics& dyn, int n_samples,
                                         const RngStream& rng) {
  if (l < 1) throw std::invalid_argument("minorization_estimate: l must be >= 1");
  if (starts.empty()) throw std::invalid_argument("minorization_estimate: no starts");
  if (n_samples < 1) throw std::invalid_argument("minorization_estimate: n_samples must be >= 1");
  dyn.validate();
  MinorizationResult result;
  result.per_start.assign(starts.size(), 0.0);
  std::vector<std::uint64_t> hits(starts.size(), 0);
  if (!target.empty()) {
    parallel_for(starts.size(), [&](std::size_t i) {
      const SeparatedPair start = SeparatedPair::from_state(starts[i]);
      const RngStream base = rng.substream(i);
      std::uint64_t h = 0;
      for (int k = 0; k < n_samples; ++k) {
        RngStream r = base.substream(static_cast<std::uint64_t>(k));
        SeparatedPair p = start;
        for (int s = 0; s < l; ++s) p = two_point_chain_step(p, amplitude, dyn, r);
        if (target.contains(p.sep)) ++h;
      }
      hits[i] = h;
    });
  }
  for (std::size_t i = 0; i < starts.size(); ++i) {
    result.per_start[i] = static_cast<double>(hits[i]) / n_samples;
  }
  const auto worst = std::min_element(result.per_start.begin(), result.per_start.end());
  result.worst_start = static_cast<std::size_t>(worst - result.per_start.begin());
  result.alpha_hat = *worst;
  result.alpha_lower =
      wilson_interval(hits[result.worst_start], static_cast<std::uint64_t>(n_samples)).lo;
  return result;
}

// ------------------------------------------------------------------ difference chain

namespace {

int coarse_bin(const Displacement& d, int bins) noexcept {
  auto index = [bins](double v) {
    return std::clamp(static_cast<int>(std::floor((v + 0.5) * bins)), 0, bins - 1);
  };
  return index(d.d2) * bins + index(d.d1);
}

}  // namespace

DifferenceChainReport difference_chain_validation(double amplitude, const TwoPointDynamics& dyn,
                                                  int n_samples, const RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("difference_chain_validation: n_samples must be >= 1");
  dyn.validate();
  DifferenceChainReport report;
  const int bins = report.bins_per_axis;
  std::vector<std::uint8_t> full_bin(static_cast<std::size_t>(n_samples));
  std::vector<std::uint8_t> reduced_bin(static_cast<std::size_t>(n_samples));
  const RngStream start_family = rng.substream(2);
  const RngStream full_family = rng.substream(0);
  const RngStream reduced_family = rng.substream(1);

  parallel_for(full_bin.size(), [&](std::size_t k) {
    RngStream s = start_family.substream(k);
    Displacement d;
    do {
      d = {0.2 * s.uniform() - 0.1, 0.2 * s.uniform() - 0.1};
    } while (d.d1 == 0.0 && d.d2 == 0.0);
    const TorusPoint x = uniform_point(s);

    RngStream rf = full_family.substream(k);
    const double ze = rf.uniform();
    const double zo = rf.uniform();
    const TwoPointState out =
        two_point_chain_step(TwoPointState{x, translate(x, d)}, ze, zo, amplitude, dyn, rf);
    full_bin[k] = static_cast<std::uint8_t>(coarse_bin(displacement(out.x, out.y), bins));

    RngStream rr = reduced_family.substream(k);
    reduced_bin[k] =
        static_cast<std::uint8_t>(coarse_bin(separation_chain_step(d, amplitude, dyn, rr), bins));
  });

  const std::size_t cells = static_cast<std::size_t>(bins) * bins;
  report.full_counts.assign(cells, 0);
  report.reduced_counts.assign(cells, 0);
  for (std::size_t k = 0; k < full_bin.size(); ++k) {
    ++report.full_counts[full_bin[k]];
    ++report.reduced_counts[reduced_bin[k]];
  }
  report.z.assign(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = static_cast<double>(report.full_counts[c]);
    const double b = static_cast<double>(report.reduced_counts[c]);
    if (a + b > 0.0) report.z[c] = (a - b) / std::sqrt(a + b);
    report.max_abs_z = std::max(report.max_abs_z, std::abs(report.z[c]));
  }
  return report;
}

}  // namespace shearmix
