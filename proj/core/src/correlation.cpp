#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "shearmix/harris.hpp"
#include "shearmix/parallel.hpp"

namespace shearmix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mode_norm(const std::array<int, 2>& m) { return std::hypot(m[0], m[1]); }

void check_modes(std::span<const ModePair> modes) {
  if (modes.empty()) throw std::invalid_argument("correlation: mode list is empty");
  for (const auto& mp : modes) {
    if ((mp.m[0] == 0 && mp.m[1] == 0) || (mp.mp[0] == 0 && mp.mp[1] == 0)) {
      throw std::invalid_argument("correlation: modes must be nonzero");
    }
  }
}

}  // namespace

std::vector<ModePair> default_modes() {
  return {{{1, 0}, {-1, 0}}, {{0, 1}, {0, -1}}, {{1, 1}, {-1, -1}}};
}

CorrelationSeries correlation_series(double amplitude, double kappa,
                                     std::span<const ModePair> modes, int n_max, int n_particles,
                                     const RngStream& shifts, const RngStream& noise,
                                     const CorrelationOptions& options) {
  check_modes(modes);
  if (n_max < 0) throw std::invalid_argument("correlation_series: n_max must be >= 0");
  if (n_particles < 1) throw std::invalid_argument("correlation_series: n_particles must be >= 1");
  const SdeConfig cfg{kappa, options.substeps, options.drift_sign};
  cfg.validate();

  // Starts depend on the shift realization only, so refreshing the noise
  // path leaves the particle sample fixed.
  RngStream start_rng = shifts.substream(0x5EED);
  const auto np = static_cast<std::size_t>(n_particles);
  std::vector<TorusPoint> start(np);
  for (auto& x : start) x = uniform_point(start_rng);
  std::vector<TorusPoint> pos = start;

  std::vector<std::vector<double>> start_phase(modes.size(), std::vector<double>(np));
  for (std::size_t j = 0; j < modes.size(); ++j) {
    for (std::size_t i = 0; i < np; ++i) {
      start_phase[j][i] = kTwoPi * (modes[j].m[0] * start[i].x1 + modes[j].m[1] * start[i].x2);
    }
  }

  CorrelationSeries series(modes.size(), std::vector<double>(static_cast<std::size_t>(n_max) + 1));
  auto record = [&](int n) {
    for (std::size_t j = 0; j < modes.size(); ++j) {
      double re = 0.0, im = 0.0;
      for (std::size_t i = 0; i < np; ++i) {
        const double phase =
            start_phase[j][i] + kTwoPi * (modes[j].mp[0] * pos[i].x1 + modes[j].mp[1] * pos[i].x2);
        re += std::cos(phase);
        im += std::sin(phase);
      }
      series[j][static_cast<std::size_t>(n)] = std::min(1.0, std::hypot(re, im) / n_particles);
    }
  };

  record(0);
  RngStream w = noise;
  const double amp = cfg.signed_amplitude(amplitude);
  for (int n = 0; n < n_max; ++n) {
    const double ze = shifts.uniform_at(2 * static_cast<std::uint64_t>(n));
    const double zo = shifts.uniform_at(2 * static_cast<std::uint64_t>(n) + 1);
    if (kappa == 0.0) {
      for (auto& x : pos) x = double_step(x, ze, zo, amp, options.profile);
    } else {
      for (const auto& [zeta, axis] :
           {std::pair{ze, Axis::horizontal}, std::pair{zo, Axis::vertical}}) {
        const BrownianPath path = sample_brownian_path(cfg.substeps, w);
        for (auto& x : pos) {
          x = sde_unit_step_with_path(x, zeta, axis, amplitude, options.profile, cfg, path);
        }
      }
    }
    record(n + 1);
  }
  return series;
}

GammaFit fit_decay_rate(std::span<const CorrelationSeries> realizations, double noise_floor) {
  GammaFit fit;
  if (realizations.empty()) return fit;
  const std::size_t n_modes = realizations.front().size();
  const std::size_t length = realizations.front().front().size();
  bool any = false;
  bool all_decay = true;
  double slowest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_modes; ++j) {
    std::vector<double> mean(length, 0.0);
    for (const auto& r : realizations) {
      for (std::size_t n = 0; n < length; ++n) mean[n] += r[j][n];
    }
    for (double& v : mean) v /= static_cast<double>(realizations.size());
    if (!(mean[0] > noise_floor)) continue;  // uncorrelated at n = 0
    any = true;

    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < length && mean[n] > noise_floor; ++n) {
      xs.push_back(static_cast<double>(n));
      ys.push_back(std::log(mean[n]));
    }
    double gamma = 0.0;
    if (xs.size() >= 3) {
      const LinearFit lf = linear_fit(xs, ys);
      gamma = -lf.slope;
      if (gamma <= 2.0 * lf.slope_stderr) gamma = 0.0;
    } else if (xs.size() == 2) {
      gamma = ys[0] - ys[1];
    } else {
      gamma = std::log(mean[0] / noise_floor);
      fit.floor_limited = true;
    }
    if (!(gamma > 0.0)) all_decay = false;
    slowest = std::min(slowest, gamma);
  }
  fit.decay = any && all_decay;
  fit.gamma_hat = fit.decay ? slowest : 0.0;
  if (!fit.decay) fit.floor_limited = false;
  return fit;
}

DHatResult estimate_d_hat(const CorrelationSeries& series, std::span<const ModePair> modes,
                          double zeta, double noise_floor) {
  if (series.size() != modes.size()) throw std::invalid_argument("estimate_d_hat: mode count mismatch");
  DHatResult out;
  out.N.assign(modes.size(), 0);
  double K = 1.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    const auto& c = series[j];
    for (std::size_t n = c.size(); n-- > 0;) {
      const double threshold = std::max(std::exp(-zeta * static_cast<double>(n)), noise_floor);
      if (c[n] > threshold) {
        out.N[j] = static_cast<int>(n);
        break;
      }
    }
    const double a = mode_norm(modes[j].m);
    const double b = mode_norm(modes[j].mp);
    if (std::exp(zeta * out.N[j]) > a * b) K = std::max(K, std::max(a, b));
  }
  out.K = K;
  out.D_hat = 1.0;
  for (std::size_t j = 0; j < modes.size(); ++j) {
    if (mode_norm(modes[j].m) <= K + 1e-12 && mode_norm(modes[j].mp) <= K + 1e-12) {
      out.D_hat = std::max(out.D_hat, std::exp(zeta * out.N[j]));
    }
  }
  return out;
}

CorrelationReport correlation_decay(double amplitude, double kappa,
                                    std::span<const ModePair> modes, int n_max,
                                    int n_realizations, int n_particles, const RngStream& rng,
                                    const CorrelationOptions& options) {
  check_modes(modes);
  if (n_realizations < 1) throw std::invalid_argument("correlation_decay: n_realizations must be >= 1");
  if (n_particles < 10000) throw std::invalid_argument("correlation_decay: n_particles must be >= 10^4");

  CorrelationReport report;
  report.amplitude = amplitude;
  report.kappa = kappa;
  report.n_particles = n_particles;
  report.modes.assign(modes.begin(), modes.end());
  report.noise_floor = 3.0 / std::sqrt(static_cast<double>(n_particles));
  report.series.resize(static_cast<std::size_t>(n_realizations));

  const RngStream shift_family = rng.substream(0);
  const RngStream noise_family = rng.substream(1);
  parallel_for(report.series.size(), [&](std::size_t r) {
    report.series[r] = correlation_series(amplitude, kappa, modes, n_max, n_particles,
                                          shift_family.substream(r), noise_family.substream(r),
                                          options);
  });

  const GammaFit fit = fit_decay_rate(report.series, report.noise_floor);
  report.gamma_hat = fit.gamma_hat;
  report.decay_flag = !fit.decay;
  report.floor_limited = fit.floor_limited;
  report.zeta = options.zeta > 0.0 ? options.zeta : fit.gamma_hat / 3.0;

  double total = 0.0;
  for (const auto& s : report.series) {
    const DHatResult d = estimate_d_hat(s, modes, report.zeta, report.noise_floor);
    report.N_hat.push_back(d.N);
    report.D_hat.push_back(d.D_hat);
    total += d.D_hat;
  }
  report.D_kappa_hat = total / n_realizations;
  return report;
}

std::string CorrelationReport::to_json() const {
  using nlohmann::json;
  json j;
  j["amplitude"] = amplitude;
  j["kappa"] = kappa;
  j["n_particles"] = n_particles;
  json ms = json::array();
  for (const auto& m : modes) ms.push_back({{"m", m.m}, {"m_prime", m.mp}});
  j["modes"] = ms;
  j["series"] = series;
  j["N_hat"] = N_hat;
  j["D_hat"] = D_hat;
  j["D_kappa_hat"] = D_kappa_hat;
  j["gamma_hat"] = gamma_hat;
  j["decay_flag"] = decay_flag;
  j["floor_limited"] = floor_limited;
  j["zeta"] = zeta;
  j["noise_floor"] = noise_floor;
  return j.dump(2);
}

MomentTable dkappa_moments(std::span<const double> q_list, std::span<const double> kappa_list,
                           int n_realizations, const RngStream& rng, double amplitude,
                           std::span<const ModePair> modes, int n_max, int n_particles,
                           const CorrelationOptions& options) {
  if (n_realizations < 50) throw std::invalid_argument("dkappa_moments: n_realizations must be >= 50");
  if (kappa_list.empty()) throw std::invalid_argument("dkappa_moments: kappa_list is empty");
  if (q_list.empty()) throw std::invalid_argument("dkappa_moments: q_list is empty");

  const auto smallest = static_cast<std::size_t>(
      std::min_element(kappa_list.begin(), kappa_list.end()) - kappa_list.begin());
  MomentTable table;
  table.reports.resize(kappa_list.size());
  table.reports[smallest] = correlation_decay(amplitude, kappa_list[smallest], modes, n_max,
                                              n_realizations, n_particles, rng, options);
  table.zeta = table.reports[smallest].zeta;
  CorrelationOptions fixed = options;
  fixed.zeta = table.zeta;
  for (std::size_t k = 0; k < kappa_list.size(); ++k) {
    if (k == smallest) continue;
    table.reports[k] = correlation_decay(amplitude, kappa_list[k], modes, n_max, n_realizations,
                                         n_particles, rng, fixed);
  }

  table.max_over_kappa.assign(q_list.size(), 0.0);
  for (std::size_t k = 0; k < kappa_list.size(); ++k) {
    for (std::size_t qi = 0; qi < q_list.size(); ++qi) {
      const double q = q_list[qi];
      RunningStats st;
      for (double d : table.reports[k].D_hat) st.add(q == 0.0 ? 1.0 : std::pow(d, q));
      table.rows.push_back({kappa_list[k], q, st.mean(), st.sem()});
      table.max_over_kappa[qi] = std::max(table.max_over_kappa[qi], st.mean());
    }
  }
  return table;
}

}  // namespace shearmix
