#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "shearmix/harris.hpp"
#include "shearmix/parallel.hpp"

namespace shearmix {

int UlamChain::state_of(const Displacement& d) const noexcept {
  auto index = [this](double v) {
    return std::clamp(static_cast<int>(std::floor((v + 0.5) * m)), 0, m - 1);
  };
  const int cell = index(d.d2) * m + index(d.d1);
  const int removed = removed_cell();
  if (cell == removed) return -1;
  return cell < removed ? cell : cell - 1;
}

Displacement UlamChain::bin_center(int state) const noexcept {
  const int cell = state < removed_cell() ? state : state + 1;
  const int b1 = cell % m;
  const int b2 = cell / m;
  return {(b1 + 0.5) / m - 0.5, (b2 + 0.5) / m - 0.5};
}

std::pair<double, double> UlamChain::stochasticity_error() const noexcept {
  double worst_sum = 0.0;
  double min_entry = matrix.empty() ? 0.0 : matrix.front();
  const int s = states();
  for (int r = 0; r < s; ++r) {
    double sum = 0.0;
    for (int c = 0; c < s; ++c) {
      const double v = at(r, c);
      sum += v;
      min_entry = std::min(min_entry, v);
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return {worst_sum, min_entry};
}

std::string UlamChain::summary_json() const {
  const auto [row_error, min_entry] = stochasticity_error();
  nlohmann::json j = {{"m", m},
                      {"states", states()},
                      {"amplitude", amplitude},
                      {"kappa", kappa},
                      {"samples_per_bin", samples_per_bin},
                      {"removed_cell", removed_cell()},
                      {"max_row_sum_error", row_error},
                      {"min_entry", min_entry}};
  return j.dump(2);
}

UlamChain ulam_build(double amplitude, const TwoPointDynamics& dyn, int m_bins,
                     int samples_per_bin, const RngStream& rng) {
  if (m_bins < 8 || m_bins % 2 != 0) throw std::invalid_argument("ulam_build: m_bins must be even and >= 8");
  if (samples_per_bin < 1000) throw std::invalid_argument("ulam_build: samples_per_bin must be >= 1000");
  dyn.validate();

  UlamChain chain;
  chain.m = m_bins;
  chain.amplitude = amplitude;
  chain.kappa = dyn.kappa;
  chain.samples_per_bin = samples_per_bin;
  const int s = chain.states();
  chain.matrix.assign(static_cast<std::size_t>(s) * s, 0.0);
  const double width = 1.0 / m_bins;

  parallel_for(static_cast<std::size_t>(s), [&](std::size_t row) {
    const int state = static_cast<int>(row);
    const Displacement center = chain.bin_center(state);
    const RngStream bin_rng = rng.substream(row);
    std::vector<std::uint32_t> counts(static_cast<std::size_t>(s), 0);
    std::uint64_t landed = 0;
    for (int k = 0; k < samples_per_bin; ++k) {
      RngStream r = bin_rng.substream(static_cast<std::uint64_t>(k));
      Displacement d{center.d1 + (r.uniform() - 0.5) * width,
                     center.d2 + (r.uniform() - 0.5) * width};
      if (chain.state_of(d) != state) d = center;
      const SeparatedPair start{uniform_point(r), d};
      const SeparatedPair end = two_point_chain_step(start, amplitude, dyn, r);
      const int to = chain.state_of(end.sep);
      if (to < 0) continue;
      ++counts[static_cast<std::size_t>(to)];
      ++landed;
    }
    double* out = chain.matrix.data() + row * static_cast<std::size_t>(s);
    if (landed == 0) {
      out[row] = 1.0;
      return;
    }
    const double inv = 1.0 / static_cast<double>(landed);
    for (int c = 0; c < s; ++c) out[c] = counts[static_cast<std::size_t>(c)] * inv;
  });
  return chain;
}

double rho_beta_distance(std::span<const double> mu1, std::span<const double> mu2,
                         std::span<const double> v_weights, double beta_weight) {
  if (mu1.size() != mu2.size() || mu1.size() != v_weights.size()) {
    throw std::invalid_argument("rho_beta_distance: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    total += (1.0 + beta_weight * v_weights[k]) * std::abs(mu1[k] - mu2[k]);
  }
  return total;
}

namespace {

// out = mu P for a row-major states x states matrix.
void left_multiply(std::span<const double> matrix, int states, std::span<const double> mu,
                   std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(states), 0.0);
  for (int r = 0; r < states; ++r) {
    const double w = mu[static_cast<std::size_t>(r)];
    if (w == 0.0) continue;
    const double* row = matrix.data() + static_cast<std::size_t>(r) * states;
    for (int c = 0; c < states; ++c) out[static_cast<std::size_t>(c)] += w * row[c];
  }
}

std::vector<double> push_forward(std::span<const double> matrix, int states,
                                 std::vector<double> mu, int l) {
  std::vector<double> next;
  for (int s = 0; s < l; ++s) {
    left_multiply(matrix, states, mu, next);
    mu.swap(next);
  }
  return mu;
}

std::vector<double> random_mixture(int states, RngStream& r) {
  std::vector<double> mu(static_cast<std::size_t>(states), 0.0);
  constexpr int kAtoms = 8;
  double total = 0.0;
  for (int a = 0; a < kAtoms; ++a) {
    const auto idx = static_cast<std::size_t>(r() % static_cast<std::uint64_t>(states));
    const double w = -std::log(1.0 - r.uniform());
    mu[idx] += w;
    total += w;
  }
  for (double& v : mu) v /= total;
  return mu;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

void project_mean_zero(std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

}  // namespace

ContractionReport contraction_factor(std::span<const double> matrix, int states,
                                     std::span<const double> v_weights, double beta_weight,
                                     int l, const RngStream& rng, int n_pairs) {
  if (states < 2 || matrix.size() != static_cast<std::size_t>(states) * states) {
    throw std::invalid_argument("contraction_factor: matrix must be states x states");
  }
  if (v_weights.size() != static_cast<std::size_t>(states)) {
    throw std::invalid_argument("contraction_factor: v_weights size mismatch");
  }
  if (l < 1) throw std::invalid_argument("contraction_factor: l must be >= 1");
  if (n_pairs < 100) throw std::invalid_argument("contraction_factor: n_pairs must be >= 100");

  ContractionReport report;
  report.n_pairs = n_pairs;
  std::vector<double> ratios(static_cast<std::size_t>(n_pairs), 0.0);
  parallel_for(ratios.size(), [&](std::size_t k) {
    RngStream r = rng.substream(k);
    std::vector<double> mu1, mu2;
    if (k % 2 == 0) {
      const auto i = static_cast<std::size_t>(r() % static_cast<std::uint64_t>(states));
      auto j = static_cast<std::size_t>(r() % static_cast<std::uint64_t>(states - 1));
      if (j >= i) ++j;
      mu1.assign(static_cast<std::size_t>(states), 0.0);
      mu2.assign(static_cast<std::size_t>(states), 0.0);
      mu1[i] = 1.0;
      mu2[j] = 1.0;
    } else {
      mu1 = random_mixture(states, r);
      mu2 = random_mixture(states, r);
    }
    const double before = rho_beta_distance(mu1, mu2, v_weights, beta_weight);
    if (before == 0.0) return;
    const auto p1 = push_forward(matrix, states, mu1, l);
    const auto p2 = push_forward(matrix, states, mu2, l);
    ratios[k] = rho_beta_distance(p1, p2, v_weights, beta_weight) / before;
  });
  report.alpha_bar_hat = *std::max_element(ratios.begin(), ratios.end());

  // Power iteration for |lambda_2| on the invariant subspace {sum mu = 0}.
  constexpr int kWindow = 100;
  constexpr int kMaxIterations = 10000;
  constexpr double kTolerance = 1e-6;
  RngStream r = rng.substream(0xE16E);
  std::vector<double> mu(static_cast<std::size_t>(states));
  for (double& v : mu) v = r.normal();
  project_mean_zero(mu);
  double norm = l1_norm(mu);
  for (double& v : mu) v /= norm;

  std::vector<double> next;
  double previous = -1.0;
  double log_sum = 0.0;
  int in_window = 0;
  double estimate = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    left_multiply(matrix, states, mu, next);
    project_mean_zero(next);
    norm = l1_norm(next);
    report.iterations = it;
    if (norm < 1e-300) {
      estimate = 0.0;
      report.converged = true;
      break;
    }
    for (double& v : next) v /= norm;
    mu.swap(next);
    log_sum += std::log(norm);
    if (++in_window == kWindow) {
      estimate = std::exp(log_sum / kWindow);
      if (previous >= 0.0 && std::abs(estimate - previous) <= kTolerance * std::max(estimate, 1e-12)) {
        report.converged = true;
        break;
      }
      previous = estimate;
      log_sum = 0.0;
      in_window = 0;
    }
  }
  if (!report.converged && in_window > 0 && previous < 0.0) estimate = std::exp(log_sum / in_window);
  report.second_eigenvalue = estimate;
  report.spectral_gap = std::clamp(1.0 - estimate, 0.0, 1.0);
  return report;
}

ContractionReport contraction_factor(const UlamChain& chain, const LyapunovParams& params,
                                     double beta_weight, int l, const RngStream& rng,
                                     int n_pairs) {
  params.validate();
  std::vector<double> weights(static_cast<std::size_t>(chain.states()));
  for (int s = 0; s < chain.states(); ++s) {
    weights[static_cast<std::size_t>(s)] = lyapunov_V(chain.bin_center(s), params);
  }
  return contraction_factor(chain.matrix, chain.states(), weights, beta_weight, l, rng, n_pairs);
}

}  // namespace shearmix
