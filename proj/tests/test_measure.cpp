#include <doctest.h>

#include <cmath>
#include <random>

#include "mfgz/errors.hpp"
#include "mfgz/measure.hpp"
#include "mfgz/transport.hpp"

using namespace mfgz;

TEST_CASE("wasserstein on small laws") {
  CHECK(wasserstein(2, EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({0.0})) == 0.0);
  CHECK(wasserstein(2, EmpiricalMeasure::dirac({1.0}), EmpiricalMeasure::dirac({3.0})) == doctest::Approx(2.0).epsilon(1e-15));
  const auto a = EmpiricalMeasure::uniform(1, {0.0, 2.0});
  const auto b = EmpiricalMeasure::uniform(1, {1.0, 3.0});
  CHECK(wasserstein(2, a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wasserstein_transport(2, a, b) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wasserstein(1, EmpiricalMeasure::uniform(1, {0.0, 1.0}), EmpiricalMeasure::dirac({0.5})) ==
        doctest::Approx(0.5));
}

TEST_CASE("dim 2 transport matches an assignment oracle") {
  // assignment computed independently (scipy linear_sum_assignment)
  const auto a = EmpiricalMeasure::uniform(2, {0, 0, 1, 0, 0, 2});
  const auto b = EmpiricalMeasure::uniform(2, {1, 1, 2, 0.5, -1, 0});
  CHECK(wasserstein(2, a, b) == doctest::Approx(1.1902380714238083).epsilon(1e-12));
}

TEST_CASE("optimal couplings") {
  const auto c1 = optimal_coupling(EmpiricalMeasure::dirac({0.3}), EmpiricalMeasure::dirac({-2.0}));
  REQUIRE(c1.plan.size() == 1);
  CHECK(c1.plan[0] == doctest::Approx(1.0));

  const auto c2 = optimal_coupling(EmpiricalMeasure::uniform(1, {0.0, 2.0}), EmpiricalMeasure::uniform(1, {1.0, 3.0}));
  CHECK(c2.mass(0, 0) == doctest::Approx(0.5));
  CHECK(c2.mass(1, 1) == doctest::Approx(0.5));
  CHECK(c2.mass(0, 1) == doctest::Approx(0.0));
  CHECK(c2.quadratic_cost() == doctest::Approx(1.0));

  const auto mu = EmpiricalMeasure::uniform(1, {-1.0, 0.5, 4.0});
  const auto self = optimal_coupling(mu, mu);
  CHECK(self.quadratic_cost() == doctest::Approx(0.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(self.mass(i, i) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("sorted and transport routes agree on random laws") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.5);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8, m = 1 + (trial * 3) % 8;
    std::vector<double> xa, wa, xb, wb;
    for (std::size_t i = 0; i < n; ++i) xa.push_back(g(rng)), wa.push_back(w(rng));
    for (std::size_t i = 0; i < m; ++i) xb.push_back(g(rng)), wb.push_back(w(rng));
    double sa = 0, sb = 0;
    for (double x : wa) sa += x;
    for (double x : wb) sb += x;
    for (double& x : wa) x /= sa;
    for (double& x : wb) x /= sb;
    const EmpiricalMeasure a(1, xa, wa), b(1, xb, wb);
    for (int p : {1, 2})
      CHECK(std::abs(wasserstein_sorted_1d(p, a, b) - wasserstein_transport(p, a, b)) <= 1e-10);
    CHECK(wasserstein(1, a, b) <= wasserstein(2, a, b) + 1e-12);
  }
}

TEST_CASE("transport size cap") {
  std::vector<double> atoms(2 * 80, 0.0);
  const auto a = EmpiricalMeasure::uniform(2, atoms);
  CHECK_THROWS_AS(wasserstein(2, a, a), SizeLimitExceeded);
}

TEST_CASE("quantization") {
  CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.5) == 0.0);

  QuantizationSpec d{LawFamily::dirac, 0.7};
  d.atom_count = 1;
  const auto dirac = quantize(d);
  CHECK(dirac.size() == 1);
  CHECK(dirac.atom(0)[0] == 0.7);
  CHECK(dirac.weight(0) == 1.0);

  QuantizationSpec gs;
  gs.atom_count = 2;
  const auto g2 = quantize(gs);
  CHECK(g2.atom(0)[0] == doctest::Approx(-0.6744897501960817).epsilon(1e-14));
  CHECK(g2.atom(1)[0] == doctest::Approx(0.6744897501960817).epsilon(1e-14));

  gs.atom_count = 101;
  CHECK(std::abs(measure_feature(quantize(gs), Feature::mean)[0]) <= 1e-12);
  gs.atom_count = 51;
  CHECK(std::abs(measure_feature(quantize(gs), Feature::mean_sin)[0]) <= 1e-12);

  QuantizationSpec u{LawFamily::uniform};
  u.lo = 0.0;
  u.hi = 1.0;
  u.atom_count = 4;
  const auto uq = quantize(u);
  CHECK(uq.atom(0)[0] == doctest::Approx(0.125));
  CHECK(uq.atom(3)[0] == doctest::Approx(0.875));
}

TEST_CASE("features") {
  CHECK(measure_feature(EmpiricalMeasure::dirac({2.0}), "mean")[0] == 2.0);
  CHECK(measure_feature(EmpiricalMeasure::uniform(1, {-0.4, 0.4}), Feature::mean_sin)[0] == 0.0);
  CHECK(measure_feature(EmpiricalMeasure::uniform(1, {1.0, 3.0}), Feature::second_moment)[0] == doctest::Approx(5.0));
  CHECK_THROWS_AS(feature_from_name("median"), InvalidArgument);
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(EmpiricalMeasure(1, {0.0, 1.0}, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(EmpiricalMeasure(1, {0.0}, {-1.0}), InvalidArgument);
  CHECK_THROWS_AS(EmpiricalMeasure(2, {0.0, 1.0, 2.0}, {1.0}), InvalidArgument);
  const auto mu = EmpiricalMeasure(1, {1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
  const std::size_t perm[] = {2, 0, 1};
  const auto p = mu.permuted(perm);
  CHECK(p.atom(0)[0] == 3.0);
  CHECK(p.weight(0) == 0.5);
  CHECK(wasserstein(2, mu, p) == 0.0);
}
