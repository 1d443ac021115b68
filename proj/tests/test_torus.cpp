#include <cmath>
#include <concepts>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "shearmix/parallel.hpp"
#include "shearmix/rng.hpp"
#include "shearmix/stats.hpp"
#include "shearmix/torus.hpp"

using namespace shearmix;

static_assert(std::uniform_random_bit_generator<RngStream>);

TEST_CASE("wrap reduces each coordinate into [0, 1)") {
  auto p = wrap(1.25, -0.5);
  CHECK(p.x1 == 0.25);
  CHECK(p.x2 == 0.5);
  p = wrap(0.0, 0.0);
  CHECK(p == TorusPoint{0.0, 0.0});
  p = wrap(3.0, -2.0);
  CHECK(p == TorusPoint{0.0, 0.0});
  // Values just below an integer must not round up to 1.0.
  p = wrap(-1e-18, 0.999999999999999999);
  CHECK(p.x1 < 1.0);
  CHECK(p.x2 < 1.0);
}

TEST_CASE("wrap rejects non-finite input") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(wrap(nan, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(wrap(0.0, inf), std::invalid_argument);
  CHECK_THROWS_AS(wrap(-inf, 0.0), std::invalid_argument);
}

TEST_CASE("wrap is idempotent") {
  RngStream rng(7, 0);
  for (int k = 0; k < 10000; ++k) {
    const double a = (rng.uniform() - 0.5) * 1e3;
    const double b = (rng.uniform() - 0.5) * 1e3;
    const TorusPoint once = wrap(a, b);
    CHECK(wrap(once.x1, once.x2) == once);
    CHECK(once.x1 >= 0.0);
    CHECK(once.x1 < 1.0);
  }
}

TEST_CASE("displacement is the minimal wrapped difference") {
  Displacement d = displacement({0.9, 0.5}, {0.1, 0.5});
  CHECK(d.d1 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(d.d2 == 0.0);
  CHECK(displacement({0.3, 0.7}, {0.3, 0.7}) == Displacement{0.0, 0.0});
  d = displacement({0.0, 0.0}, {0.5, 0.0});
  CHECK(d.d1 == -0.5);
  d = displacement({0.5, 0.0}, {0.0, 0.0});
  CHECK(d.d1 == -0.5);
}

TEST_CASE("displacement is antisymmetric away from ties") {
  RngStream rng(11, 0);
  for (int k = 0; k < 10000; ++k) {
    const TorusPoint x = uniform_point(rng);
    const TorusPoint y = uniform_point(rng);
    const Displacement a = displacement(x, y);
    const Displacement b = displacement(y, x);
    if (std::abs(std::abs(a.d1) - 0.5) < 1e-12 || std::abs(std::abs(a.d2) - 0.5) < 1e-12) continue;
    CHECK(a.d1 == doctest::Approx(-b.d1).epsilon(1e-12));
    CHECK(a.d2 == doctest::Approx(-b.d2).epsilon(1e-12));
    CHECK(a.d1 >= -0.5);
    CHECK(a.d1 < 0.5);
  }
}

TEST_CASE("translate inverts displacement") {
  RngStream rng(12, 0);
  for (int k = 0; k < 1000; ++k) {
    const TorusPoint x = uniform_point(rng);
    const TorusPoint y = uniform_point(rng);
    const TorusPoint z = translate(x, displacement(x, y));
    CHECK(dist(z, y) < 1e-15);
  }
}

TEST_CASE("Euclidean and max distances") {
  CHECK(dist({0.0, 0.0}, {0.3, 0.4}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dist_linf({0.0, 0.0}, {0.3, 0.4}) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(dist({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(dist_linf({0.2, 0.8}, {0.2, 0.8}) == 0.0);
  CHECK(dist_linf({0.9, 0.9}, {0.1, 0.1}) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("metric inequalities on random triples") {
  RngStream rng(13, 0);
  for (int k = 0; k < 10000; ++k) {
    const TorusPoint x = uniform_point(rng);
    const TorusPoint y = uniform_point(rng);
    const TorusPoint z = uniform_point(rng);
    CHECK(dist(x, z) <= dist(x, y) + dist(y, z) + 1e-15);
    CHECK(dist_linf(x, y) <= dist(x, y) + 1e-15);
    CHECK(dist(x, y) <= std::sqrt(2.0) * dist_linf(x, y) + 1e-15);
  }
}

TEST_CASE("wrapped Gaussian") {
  RngStream rng(21, 0);
  CHECK_THROWS_AS(wrapped_gaussian(-1.0, rng), std::invalid_argument);
  CHECK(wrapped_gaussian(0.0, rng) == Displacement{0.0, 0.0});

  SUBCASE("small variance matches the per-coordinate variance") {
    RunningStats s1, s2;
    for (int k = 0; k < 1000000; ++k) {
      const Displacement d = wrapped_gaussian(1e-4, rng);
      s1.add(d.d1);
      s2.add(d.d2);
    }
    CHECK(s1.variance() == doctest::Approx(1e-4).epsilon(0.02));
    CHECK(s2.variance() == doctest::Approx(1e-4).epsilon(0.02));
  }
  SUBCASE("large variance is uniform on the torus") {
    std::vector<double> a, b;
    for (int k = 0; k < 20000; ++k) {
      const Displacement d = wrapped_gaussian(10.0, rng);
      a.push_back(d.d1 + 0.5);
      b.push_back(d.d2 + 0.5);
    }
    CHECK(ks_uniform(a).p_value > 0.01);
    CHECK(ks_uniform(b).p_value > 0.01);
  }
}

TEST_CASE("RngStream reproducibility and substreams") {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int k = 0; k < 1000; ++k) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);

  RngStream e(42, 3);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(e.bits_at(i) == va[i]);
  CHECK(e.uniform_at(5) == RngStream(42, 3).uniform_at(5));

  const RngStream parent(5, 0);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t k = 0; k < 1000; ++k) firsts.insert(parent.substream(k)());
  CHECK(firsts.size() == 1000);
  CHECK(parent.substream(9)() == RngStream(5, 0).substream(9)());
}

TEST_CASE("RngStream uniforms and normals have the right moments") {
  RngStream rng(99, 0);
  RunningStats u, n;
  std::vector<double> us;
  for (int k = 0; k < 200000; ++k) {
    const double v = rng.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    u.add(v);
    if (k < 20000) us.push_back(v);
    n.add(rng.normal());
  }
  CHECK(std::abs(u.mean() - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / 200000.0));
  CHECK(std::abs(n.mean()) < 5.0 / std::sqrt(200000.0));
  CHECK(n.variance() == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ks_uniform(us).p_value > 0.01);

  // Substreams are uncorrelated: their sample correlation is O(1/sqrt(N)).
  RngStream s1 = rng.substream(1), s2 = rng.substream(2);
  double cross = 0.0;
  const int N = 100000;
  for (int k = 0; k < N; ++k) cross += (s1.uniform() - 0.5) * (s2.uniform() - 0.5);
  CHECK(std::abs(cross / N * 12.0) < 5.0 / std::sqrt(N));
}

TEST_CASE("uniform_point is uniform per coordinate") {
  RngStream rng(31, 0);
  std::vector<double> a, b;
  for (int k = 0; k < 20000; ++k) {
    const TorusPoint p = uniform_point(rng);
    a.push_back(p.x1);
    b.push_back(p.x2);
  }
  CHECK(ks_uniform(a).p_value > 0.01);
  CHECK(ks_uniform(b).p_value > 0.01);
}

TEST_CASE("parallel_for is deterministic and propagates exceptions") {
  std::vector<double> one(1000), many(1000);
  auto fill = [](std::vector<double>& out) {
    return [&out](std::size_t i) {
      RngStream r = RngStream(3, 0).substream(i);
      out[i] = r.normal();
    };
  };
  parallel_for(one.size(), fill(one), 1);
  parallel_for(many.size(), fill(many), 4);
  CHECK(one == many);

  CHECK_THROWS_AS(parallel_for(
                      100,
                      [](std::size_t i) {
                        if (i == 57) throw std::runtime_error("boom");
                      },
                      3),
                  std::runtime_error);

  const int before = default_threads();
  set_default_threads(0);
  CHECK(default_threads() >= 1);
  set_default_threads(before);
}
