#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "shearmix/spectral.hpp"
#include "shearmix/stats.hpp"

using namespace shearmix;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
  return m;
}

double l2_diff(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a.values()[k] - b.values()[k];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

ScalarField random_smooth(int n, RngStream& rng, int kmax = 4) {
  std::vector<double> amp, ph;
  for (int k = 0; k < 2 * kmax * kmax; ++k) {
    amp.push_back(rng.normal());
    ph.push_back(rng.uniform());
  }
  return ScalarField::from_function(n, [&](double x1, double x2) {
    double v = 1.5;
    int idx = 0;
    for (int a = 0; a < kmax; ++a)
      for (int b = -kmax + 1; b <= kmax; ++b, ++idx)
        if (a != 0 || b != 0) v += 0.1 * amp[idx] * std::cos(2.0 * kPi * (a * x1 + b * x2 + ph[idx]));
    return v;
  });
}

/// sup |p - 1| of a heat-evolved periodized Gaussian with variance s2 per
/// coordinate, attained at its centre.
double heat_gap(double s2) {
  double s = 0.0;
  for (int a = -12; a <= 12; ++a)
    for (int b = -12; b <= 12; ++b)
      if (a != 0 || b != 0) s += std::exp(-2.0 * kPi * kPi * s2 * (a * a + b * b));
  return s;
}

}  // namespace

TEST_CASE("ScalarField basics") {
  CHECK_THROWS(ScalarField(6));
  CHECK_THROWS(ScalarField(2));
  CHECK_THROWS(ScalarField(8, std::vector<double>(10, 0.0)));
  const ScalarField f = ScalarField::from_function(8, [](double x1, double x2) { return x1 + 10 * x2; });
  CHECK(f.at(3, 0) == doctest::Approx(3.0 / 8.0));
  CHECK(f.at(0, 2) == doctest::Approx(20.0 / 8.0));
  CHECK(f.mean() == doctest::Approx(11.0 * 3.5 / 8.0));
  CHECK(f.all_finite());
  CHECK(wavenumber(0, 8) == 0);
  CHECK(wavenumber(4, 8) == 4);
  CHECK(wavenumber(5, 8) == -3);
}

TEST_CASE("forward transform matches a naive DFT") {
  const int n = 16;
  RngStream rng(1, 0);
  ScalarField f(n);
  for (double& v : f.values()) v = rng.normal();
  const auto c = spectral_grid(n).forward(f);
  const int half = n / 2 + 1;
  REQUIRE(c.size() == static_cast<std::size_t>(n * half));
  for (int j2 = 0; j2 < n; ++j2) {
    for (int k1 = 0; k1 < half; ++k1) {
      const int k2 = wavenumber(j2, n);
      std::complex<double> acc = 0.0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          acc += f.at(i, j) * std::polar(1.0, -2.0 * kPi * (k1 * i + k2 * j) / n);
      acc /= static_cast<double>(n * n);
      CHECK(std::abs(c[static_cast<std::size_t>(j2) * half + k1] - acc) < 1e-13);
    }
  }
  const ScalarField back = spectral_grid(n).inverse(c);
  CHECK(max_abs_diff(back, f) < 1e-13);
}

TEST_CASE("advect_shear_exact") {
  RngStream rng(2, 0);
  const int n = 256;
  const ScalarField f = random_smooth(n, rng);
  CHECK(max_abs_diff(advect_shear_exact(f, 0.3, Axis::horizontal, 0.0, Profile::sine), f) <= 1e-13);

  for (double A : {0.25, 0.7, 1.0}) {
    const double zeta = rng.uniform();
    const ScalarField c = ScalarField::from_function(n, [](double x1, double) { return std::cos(2 * kPi * x1); });
    const ScalarField out = advect_shear_exact(c, zeta, Axis::horizontal, A, Profile::sine);
    const ScalarField exact = ScalarField::from_function(n, [&](double x1, double x2) {
      return std::cos(2 * kPi * (x1 - A * std::sin(2 * kPi * (x2 - zeta))));
    });
    CHECK(max_abs_diff(out, exact) <= 1e-10);

    const ScalarField s = ScalarField::from_function(n, [](double, double x2) { return std::sin(4 * kPi * x2); });
    const ScalarField vout = advect_shear_exact(s, zeta, Axis::vertical, A, Profile::sine);
    const ScalarField vexact = ScalarField::from_function(n, [&](double x1, double x2) {
      return std::sin(4 * kPi * (x2 - A * std::sin(2 * kPi * (x1 - zeta))));
    });
    CHECK(max_abs_diff(vout, vexact) <= 1e-10);

    for (Profile p : {Profile::sine, Profile::piecewise_linear}) {
      const ScalarField g = advect_shear_exact(f, zeta, Axis::vertical, A, p);
      CHECK(norms(g).l2 == doctest::Approx(norms(f).l2).epsilon(1e-12));
      CHECK(std::abs(g.mean() - f.mean()) <= 1e-12 * 2.5);
    }
  }
}

TEST_CASE("diffuse_exact") {
  const int n = 64;
  const ScalarField s = ScalarField::from_function(n, [](double x1, double) { return std::sin(2 * kPi * x1); });
  const ScalarField out = diffuse_exact(s, 0.01, 1.0);
  const double factor = std::exp(-0.04 * kPi * kPi);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(out.values()[k] - factor * s.values()[k]) <= 1e-14);
  CHECK(max_abs_diff(diffuse_exact(s, 0.0, 5.0), s) <= 1e-14);
  CHECK_THROWS(diffuse_exact(s, -1.0, 1.0));
  CHECK_THROWS(diffuse_exact(s, 1.0, -1.0));

  const ScalarField first = ScalarField::from_function(n, [](double x1, double x2) {
    return 3.0 + std::cos(2 * kPi * x1) - 0.5 * std::sin(2 * kPi * x2 + 0.3);
  });
  for (double t : {0.1, 1.0, 7.0}) {
    const ScalarField d = diffuse_exact(first, 2e-3, t);
    CHECK(norms(d).l2 == doctest::Approx(std::exp(-4 * kPi * kPi * 2e-3 * t) * norms(first).l2).epsilon(1e-12));
    CHECK(d.mean() == doctest::Approx(first.mean()).epsilon(1e-14));
  }
}

TEST_CASE("period_step") {
  RngStream rng(3, 0);
  const int n = 128;
  const ScalarField f = random_smooth(n, rng);
  CHECK_THROWS(period_step(f, 0.1, 0.2, 1e-3, 0.5, Profile::sine, 0));

  SUBCASE("no diffusion conserves L2 and the mean") {
    // Energy that reaches the Nyquist mode cannot be phase shifted on a real
    // grid, so the data stays well inside the band.
    ScalarField g = random_smooth(256, rng, 2);
    const double l2 = norms(g).l2;
    for (int k = 0; k < 2; ++k) g = period_step(g, rng.uniform(), rng.uniform(), 0.0, 0.3, Profile::sine, 1);
    CHECK(norms(g).l2 == doctest::Approx(l2).epsilon(1e-12));
    CHECK(std::abs(g.mean() - f.mean()) <= 1e-12 * 2.5);
  }

  SUBCASE("Strang splitting is second order") {
    const double kappa = 1e-2, A = 0.5;
    const ScalarField bump = gaussian_bump(n, {0.3, 0.6}, 0.1);
    const ScalarField ref = period_step(bump, 0.15, 0.55, kappa, A, Profile::sine, 128);
    std::vector<double> lx, ly;
    for (int m : {1, 2, 4, 8}) {
      const ScalarField g = period_step(bump, 0.15, 0.55, kappa, A, Profile::sine, m);
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(std::log(l2_diff(g, ref)));
    }
    const LinearFit fit = linear_fit(lx, ly);
    MESSAGE("Strang slope " << fit.slope);
    CHECK(-fit.slope >= 1.9);
  }

  SUBCASE("pure diffusion of a narrow Gaussian is the heat kernel") {
    const double kappa = 3e-4, sigma = 0.02;
    const ScalarField bump = gaussian_bump(256, {0.4, 0.7}, sigma);
    // Per period the SDE adds variance 4 kappa per coordinate; the two pulsed
    // kicks add 2 kappa.
    for (SplitScheme scheme : {SplitScheme::strang, SplitScheme::pulsed}) {
      const double added = scheme == SplitScheme::strang ? 4.0 * kappa : 2.0 * kappa;
      const ScalarField out = period_step(bump, 0.1, 0.9, kappa, 0.0, Profile::sine, 4, scheme);
      const ScalarField exact = gaussian_bump(256, {0.4, 0.7}, std::sqrt(sigma * sigma + added));
      double l1 = 0.0;
      for (std::size_t k = 0; k < out.size(); ++k) l1 += std::abs(out.values()[k] - exact.values()[k]);
      CHECK(l1 / static_cast<double>(out.size()) <= 1e-8);
    }
  }

  SUBCASE("L2 is non-increasing and the mean is conserved") {
    ScalarField g = f;
    double prev = norms(g).l2;
    for (int k = 0; k < 20; ++k) {
      g = period_step(g, rng.uniform(), rng.uniform(), 1e-3, 1.0,
                      k % 2 ? Profile::sine : Profile::piecewise_linear, 2,
                      k % 3 ? SplitScheme::strang : SplitScheme::pulsed);
      const double cur = norms(g).l2;
      CHECK(cur <= prev * (1.0 + 1e-12));
      prev = cur;
      CHECK(std::abs(g.mean() - f.mean()) <= 1e-12 * 2.5);
      CHECK(g.all_finite());
    }
  }
}

TEST_CASE("norms") {
  const int n = 256;
  const ScalarField s = ScalarField::from_function(n, [](double x1, double) { return std::sin(2 * kPi * x1); });
  const std::vector<double> orders{0.0, -1.0, 1.0};
  const NormEntry e = norms(s, orders);
  CHECK(e.l2 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(e.linf == doctest::Approx(1.0).epsilon(1e-6));
  // Grid quadrature of |sin| sums to (2 / n) cot(pi / n), which sits
  // pi^2 / (3 n^2) below 2 / pi in relative terms.
  CHECK(e.l1 == doctest::Approx(2.0 / n / std::tan(kPi / n)).epsilon(1e-12));
  CHECK(e.l1 == doctest::Approx(2.0 / kPi).epsilon(1e-4));
  REQUIRE(e.sobolev.size() == 3);
  CHECK(std::abs(e.sobolev[0] - e.l2) <= 1e-12);
  CHECK(std::abs(e.sobolev[1] - 1.0 / std::sqrt(2.0 * (1.0 + 4.0 * kPi * kPi))) <= 1e-10);
  CHECK(e.sobolev[2] == doctest::Approx(std::sqrt((1.0 + 4.0 * kPi * kPi) / 2.0)).epsilon(1e-12));
  CHECK(sobolev_norm(s, -1.0) == doctest::Approx(e.sobolev[1]).epsilon(1e-14));

  // A constant offset is removed before measuring.
  const ScalarField shifted = ScalarField::from_function(n, [](double x1, double) { return 5.0 + std::sin(2 * kPi * x1); });
  CHECK(norms(shifted).l1 == doctest::Approx(e.l1).epsilon(1e-12));

  RngStream rng(4, 0);
  const ScalarField a = random_smooth(64, rng), b = random_smooth(64, rng);
  CHECK(inner_product_grid(a, b) == doctest::Approx(inner_product_spectral(a, b)).epsilon(1e-10));
}

TEST_CASE("Gaussian bumps and resolution rules") {
  const ScalarField g = gaussian_bump(128, {0.25, 0.5}, 0.05);
  CHECK(g.mean() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.at(32, 64) == doctest::Approx(1.0 / (2 * kPi * 0.05 * 0.05)).epsilon(1e-6));
  CHECK(required_grid_size(1e-4, 0.5) == 1024);
  CHECK(required_grid_size(0.0, 3.0) == 256);
  CHECK(is_resolved(1024, 1e-4, 0.5));
  CHECK(!is_resolved(512, 1e-4, 0.5));
  CHECK(surrogate_width(256, 1e-4) == doctest::Approx(0.01));
  CHECK(surrogate_width(64, 1e-6) == doctest::Approx(2.0 / 64.0));
}

TEST_CASE("decay_run") {
  const int n = 64;
  const double kappa = 1e-3;
  const ScalarField s = ScalarField::from_function(n, [](double x1, double) { return 1.0 + std::sin(2 * kPi * x1); });
  const DecayRun still = decay_run(s, {0.0, Profile::sine, RngStream(1, 0)}, kappa, 10, 1);
  REQUIRE(still.series.size() == 11);
  for (std::size_t k = 0; k < still.series.size(); ++k) {
    CHECK(still.series.times[k] == 2.0 * k);
    const double expected = std::exp(-4 * kPi * kPi * kappa * still.series.times[k]) / std::sqrt(2.0);
    CHECK(std::abs(still.series.l2[k] - expected) <= 1e-10);
  }
  CHECK_THROWS(decay_run(s, {0.0, Profile::sine, RngStream(1, 0)}, kappa, 0, 1));
  CHECK(decay_run(s, {0.5, Profile::sine, RngStream(1, 0)}, 1e-4, 1, 1).underresolved);

  SUBCASE("shearing halves the variance at least five times faster") {
    const double k4 = 1e-4;
    const int big = required_grid_size(k4, 0.5);
    const ScalarField s4 = ScalarField::from_function(big, [](double x1, double) { return std::sin(2 * kPi * x1); });
    const DecayRun run = decay_run(s4, {0.5, Profile::sine, RngStream(2, 0)}, k4, 20, 1);
    CHECK(!run.underresolved);
    double t_half = -1.0;
    for (std::size_t k = 0; k < run.series.size(); ++k) {
      CHECK(run.series.l2[k] >= 0.0);
      if (k > 0) CHECK(run.series.l2[k] <= run.series.l2[k - 1] * (1.0 + 1e-12));
      if (t_half < 0.0 && run.series.l2[k] <= 0.5 * run.series.l2[0]) t_half = run.series.times[k];
    }
    const double heat_half = std::log(2.0) / (4 * kPi * kPi * k4);
    MESSAGE("halving time " << t_half << " vs heat-only " << heat_half);
    CHECK(t_half > 0.0);
    CHECK(5.0 * t_half <= heat_half);
  }
}

TEST_CASE("mixing_time") {
  CHECK_THROWS(mixing_time(0.1, {0.0, Profile::sine, RngStream(1, 0)}, 0.0, -1.0, 10));

  SUBCASE("heat-only baseline") {
    for (double kappa : {0.1, 0.01}) {
      MixingOptions opt;
      opt.grid_size = 64;
      const double eps = 1e-6;
      const MixingTimeResult r = mixing_time(kappa, {0.0, Profile::sine, RngStream(1, 0)}, eps, -1.0, 200, opt);
      const double sigma = surrogate_width(64, kappa);
      int expected = 0;
      while (heat_gap(sigma * sigma + 2.0 * kappa * 2.0 * expected) >= eps) ++expected;
      MESSAGE("kappa " << kappa << ": t_mix " << r.t_mix << " oracle " << expected);
      CHECK(std::abs(r.t_mix - expected) <= 1);
      CHECK(r.sup_density_gap.size() >= static_cast<std::size_t>(r.t_mix));
    }
  }

  SUBCASE("not mixed returns the sentinel with the partial series") {
    MixingOptions opt;
    opt.grid_size = 64;
    opt.sources_per_axis = 1;
    const MixingTimeResult r = mixing_time(1e-3, {0.0, Profile::sine, RngStream(1, 0)}, 1e-3, -1.0, 3, opt);
    CHECK(r.t_mix == MixingTimeResult::kNotMixed);
    CHECK(r.sup_density_gap.size() == 4);
  }

  SUBCASE("halving epsilon adds ln 2 over the tail rate") {
    MixingOptions opt;
    opt.grid_size = 256;
    opt.sources_per_axis = 2;
    const ShearSchedule sched{0.5, Profile::sine, RngStream(5, 11)};
    const double eps = 1e-3;
    const MixingTimeResult a = mixing_time(1e-2, sched, eps, -1.0, 200, opt);
    const MixingTimeResult b = mixing_time(1e-2, sched, eps / 2.0, -1.0, 200, opt);
    REQUIRE(a.t_mix > 0);
    REQUIRE(b.t_mix > 0);
    std::vector<double> x, y;
    for (std::size_t k = 1; k < b.sup_density_gap.size(); ++k) {
      if (b.sup_density_gap[k] < 0.1) {
        x.push_back(static_cast<double>(k));
        y.push_back(std::log(b.sup_density_gap[k]));
      }
    }
    REQUIRE(x.size() >= 2);
    const double rate = -linear_fit(x, y).slope;
    const double predicted = std::log(2.0) / rate;
    MESSAGE("t_mix " << a.t_mix << " -> " << b.t_mix << ", predicted shift " << predicted);
    CHECK(std::abs((b.t_mix - a.t_mix) - predicted) <= 1.0);
  }

  SUBCASE("shearing mixes ten times faster than diffusion alone") {
    const double kappa = 1e-4;
    MixingOptions sheared;
    sheared.grid_size = required_grid_size(kappa, 0.5);
    sheared.sources_per_axis = 2;
    const MixingTimeResult fast = mixing_time(kappa, {0.5, Profile::sine, RngStream(6, 11)}, 1e-2, -1.0, 100, sheared);
    REQUIRE(fast.t_mix > 0);
    MixingOptions still;
    still.grid_size = required_grid_size(kappa, 0.0);
    still.sources_per_axis = 1;
    const MixingTimeResult slow =
        mixing_time(kappa, {0.0, Profile::sine, RngStream(6, 11)}, 1e-2, -1.0, 10 * fast.t_mix, still);
    MESSAGE("sheared t_mix " << fast.t_mix);
    CHECK(slow.t_mix == MixingTimeResult::kNotMixed);
  }
}
