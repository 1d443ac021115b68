#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "shearmix/experiments.hpp"

using namespace shearmix;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

ExperimentConfig parse(json j) { return ExperimentConfig::from_json(j.dump()); }

// Peak of the periodic 1D heat kernel by the method of images.
double periodic_gaussian_peak(double variance) {
  double sum = 0.0;
  for (int m = -50; m <= 50; ++m) sum += std::exp(-0.5 * m * m / variance);
  return sum / std::sqrt(2.0 * kPi * variance);
}

// Mixing time in periods: first real t with peak^2 - 1 < epsilon, where the
// variance after t periods is sigma^2 + 4 kappa t.
double image_sum_mixing_periods(double kappa, double sigma, double epsilon) {
  auto gap = [&](double t) {
    const double p = periodic_gaussian_peak(sigma * sigma + 4.0 * kappa * t);
    return p * p - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  while (gap(hi) >= epsilon) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) >= epsilon ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const json base = {{"experiment", "mixing_sweep"}, {"kappa_list", {1e-2, 1e-3}}, {"seeds", {1}}};
  const ExperimentConfig cfg = parse(base);
  CHECK(cfg.experiment == ExperimentKind::mixing_sweep);
  CHECK(cfg.kappa_list.size() == 2);
  CHECK(cfg.drift_sign == DriftSign::plus);
  CHECK(cfg.grid_size == 256);

  const ExperimentConfig again = ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());

  auto rejects = [&](json j, const std::string& needle) {
    try {
      parse(std::move(j));
      FAIL("accepted: " << needle);
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
    }
  };
  json j = base;
  j["kapa_list"] = {1e-3};
  rejects(j, "kapa_list");
  j = base;
  j["kappa_list"] = json::array();
  rejects(j, "kappa_list must not be empty");
  j = base;
  j["kappa_list"] = {1e-3, 1e-2};
  rejects(j, "descending");
  j = base;
  j["kappa_list"] = {1e-2, 0.0};
  rejects(j, "> 0");
  j = base;
  j["seeds"] = json::array();
  rejects(j, "seeds");
  j = base;
  j["grid_size"] = 100;
  rejects(j, "power of two");
  j = base;
  j["experiment"] = "correlations";
  j["n_realizations"] = 49;
  rejects(j, "n_realizations");
  j = base;
  j["scheme"] = "euler";
  rejects(j, "scheme");
  j = base;
  j["amplitude"] = "big";
  rejects(j, "amplitude");
  rejects(json::array(), "JSON object");
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ConfigError);

  j = base;
  j["experiment"] = "drift_cert";
  j["kappa_list"] = json::array();
  j["include_kappa_zero"] = true;
  CHECK_NOTHROW(parse(j));
  j = base;
  j["experiment"] = "exponent";
  j.erase("kappa_list");
  CHECK_NOTHROW(parse(j));

  try {
    ExperimentConfig::from_file("/nonexistent/run.json");
    FAIL("missing file accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/run.json") != std::string::npos);
  }
}

TEST_CASE("heat-only mixing baseline matches an image-sum oracle") {
  for (double kappa : {1e-1, 1e-2, 1e-3}) {
    for (double sigma : {0.01, 0.05}) {
      const double expected = image_sum_mixing_periods(kappa, sigma, 1e-2);
      CHECK(heat_mixing_periods(kappa, sigma, 1e-2) == doctest::Approx(expected).epsilon(1e-8));
    }
  }
  CHECK(heat_mixing_periods(1e-2, 0.6, 1e-2) == 0.0);
}

TEST_CASE("ed_prefactor closed form") {
  const std::vector<double> linf{4.0, 2.0, 1.0, 0.5};
  const double kappa = 1e-2;
  CHECK(ed_prefactor(linf, 2.0, std::log(2.0), kappa, 1.0) ==
        doctest::Approx(4.0 * kappa * kappa / 2.0).epsilon(1e-14));
  // Slower decay than gamma makes the last term dominate.
  CHECK(ed_prefactor(linf, 1.0, std::log(4.0), kappa, 0.0) ==
        doctest::Approx(0.5 * 64.0 * kappa).epsilon(1e-14));
  CHECK_THROWS_AS(ed_prefactor(linf, 0.0, 1.0, kappa, 1.0), std::invalid_argument);
}

TEST_CASE("fit_linf_rate recovers an exponential") {
  NormSeries s;
  for (int n = 0; n < 30; ++n) {
    const double v = 3.0 * std::exp(-0.4 * n);
    s.push({2.0 * n, 1.0, 1.0, v, {}});
  }
  CHECK(fit_linf_rate(s) == doctest::Approx(0.4).epsilon(1e-10));
  NormSeries flat;
  for (int n = 0; n < 10; ++n) flat.push({2.0 * n, 1.0, 1.0, 1.0, {}});
  CHECK(fit_linf_rate(flat) == 0.0);
}

TEST_CASE("ed_verify with alpha = 0 runs and warns") {
  const ExperimentConfig cfg = parse({{"experiment", "ed_verify"},
                                      {"kappa_list", {1e-2, 5e-3}},
                                      {"seeds", {1, 2}},
                                      {"alpha", 0.0},
                                      {"amplitude", 2.0},
                                      {"grid_size", 128},
                                      {"n_periods", 10}});
  const EdVerifyResult r = run_ed_verify(cfg);
  REQUIRE(r.runs.size() == 4);
  CHECK(r.gamma_fitted);
  CHECK(r.gamma > 0.0);
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("alpha = 0") != std::string::npos;
  CHECK(warned);
  for (const auto& run : r.runs) {
    CHECK_FALSE(run.excluded);
    CHECK(run.D_hat > 0.0);
  }
  CHECK(r.moments.size() == 4);
}

TEST_CASE("pure diffusion mixing time scales like 1/kappa") {
  const ExperimentConfig cfg = parse({{"experiment", "mixing_sweep"},
                                      {"amplitude", 0.0},
                                      {"kappa_list", {2e-2, 1e-2, 5e-3, 2.5e-3}},
                                      {"seeds", {1}},
                                      {"grid_size", 128},
                                      {"sources_per_axis", 1},
                                      {"delta_width", 0.02}});
  const MixingCurve curve = run_mixing_sweep(cfg);
  REQUIRE(curve.inverse_fit.valid);
  CHECK(curve.inverse_fit.fit.r2 >= 0.99);
  for (const auto& pt : curve.points) {
    CHECK(pt.used_in_fit);
    // Periods are integers; the heat baseline is continuous.
    CHECK(pt.t_mix >= pt.t_heat);
    CHECK(pt.t_mix <= std::ceil(pt.t_heat) + 1.0);
  }
  const json fit = json::parse(mixing_fit_json(curve));
  CHECK(fit.at("inverse_fit").at("valid").get<bool>());
  CHECK(mixing_curve_csv(curve).rfind("kappa,grid_size,underresolved,t_mix,t_heat", 0) == 0);
}

TEST_CASE("smoothing exponent prediction and fitted sign") {
  json j = {{"experiment", "smoothing_scaling"},
            {"kappa_list", {1e-2, 5e-3, 2.5e-3, 1.25e-3}},
            {"seeds", {3}},
            {"amplitude", 1.0},
            {"alpha", 0.0}};
  SmoothingResult r = run_smoothing_scaling(parse(j));
  CHECK(r.predicted_exponent == -0.5);
  CHECK(r.points.size() == 8);
  j["alpha"] = 1.0;
  r = run_smoothing_scaling(parse(j));
  CHECK(r.predicted_exponent == -1.0);
  MESSAGE("fitted exponent " << r.fitted_exponent << " +- " << r.exponent_ci);
  CHECK(r.fitted_exponent < -0.5);
  CHECK(r.width_sensitivity < 0.25);
}
