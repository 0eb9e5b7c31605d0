#include <doctest.h>

#include <cmath>

#include "mfgz/errors.hpp"
#include "mfgz/lifted.hpp"
#include "support.hpp"

using namespace mfgz;

TEST_CASE("functional values") {
  CHECK(MeasureFunctional::mean_power(1).value(EmpiricalMeasure::dirac({3.0})) == 3.0);
  CHECK(MeasureFunctional::squared_mean().value(EmpiricalMeasure::uniform(1, {1.0, 3.0})) == 4.0);
  const auto sin_e = MeasureFunctional::expectation_of(Expression::parse("sin(x1)"), 1);
  CHECK(sin_e.value(EmpiricalMeasure::uniform(1, {-1.1, 1.1})) == doctest::Approx(0.0));
  CHECK_THROWS_AS(MeasureFunctional::expectation_of(Expression::parse("sin(x1) + u1"), 1), InvalidArgument);
}

TEST_CASE("closed-form measure derivatives") {
  const auto a13 = EmpiricalMeasure::uniform(1, {1.0, 3.0});
  const auto g1 = MeasureFunctional::mean_power(1).gradient(a13);
  CHECK(g1.values == std::vector<double>{1.0, 1.0});
  const auto g2 = MeasureFunctional::squared_mean().gradient(a13);
  CHECK(g2.values == std::vector<double>{4.0, 4.0});
  const auto g3 = MeasureFunctional::expectation_of(Expression::parse("sin(x1)"), 1).gradient(EmpiricalMeasure::dirac({0.0}));
  CHECK(g3.values[0] == 1.0);
}

TEST_CASE("finite differences of the particle lift") {
  CHECK(gradient_fd_check(MeasureFunctional::mean_power(1), EmpiricalMeasure::uniform(1, {0.1, -2.0, 0.7, 1.3}), 1e-5) <=
        1e-9);
  CHECK(gradient_fd_check(MeasureFunctional::squared_mean(), EmpiricalMeasure::uniform(1, {1.0, 3.0}), 1e-5) <= 1e-8);
  QuantizationSpec q;
  q.atom_count = 8;
  CHECK(gradient_fd_check(MeasureFunctional::expectation_of(Expression::parse("sin(x1)"), 1), quantize(q), 1e-5) <=
        1e-7);
  CHECK_THROWS_AS(gradient_fd_check(MeasureFunctional::mean_power(1), EmpiricalMeasure(1, {0.0, 1.0}, {0.3, 0.7}), 1e-5),
                  InvalidArgument);
}

TEST_CASE("permuting atoms permutes the gradient") {
  const auto mu = EmpiricalMeasure::uniform(1, {0.2, -1.0, 2.5});
  const std::size_t perm[] = {2, 0, 1};
  const auto fun = MeasureFunctional::expectation_of(Expression::parse("x1*x1*x1 + cos(x1)"), 1);
  const auto g = fun.gradient(mu);
  const auto gp = fun.gradient(mu.permuted(perm));
  for (std::size_t i = 0; i < 3; ++i) CHECK(gp.values[i] == g.values[perm[i]]);
}

TEST_CASE("chain rule along the flow") {
  const TimeMesh mesh(0.0, 1.0, 1);
  const double zero[] = {0.0};
  const auto u = ControlPath::constant(mesh, zero), v = ControlPath::constant(mesh, zero);
  const ParticleState s{0.0, EmpiricalMeasure::uniform(1, {1.0, 3.0})};

  const GameSpec still = test::config_of(test::game1d("0", "0", "0")).game();
  CHECK(chain_rule_check(MeasureFunctional::squared_mean(), still, s, u, v, 0.1) == 0.0);
  const GameSpec shift = test::config_of(test::game1d("0.4", "0", "0")).game();
  CHECK(chain_rule_check(MeasureFunctional::mean_power(1), shift, s, u, v, 0.1) <= 1e-12);

  // d/dt (mean^2) = 2 mean^2 = 8 at t = 0
  const GameSpec mf = test::config_of(test::game1d("feature(mean)", "0", "0")).game();
  const double r1 = chain_rule_check(MeasureFunctional::squared_mean(), mf, s, u, v, 0.1);
  const double r2 = chain_rule_check(MeasureFunctional::squared_mean(), mf, s, u, v, 0.05);
  CHECK(r1 / r2 >= 1.9);
  // exact: (4 e^{0.2} - 4) / 0.1 - 8, up to one rk4 substep of length 0.1
  CHECK(std::abs(r1 - std::abs((4 * std::exp(0.2) - 4) / 0.1 - 8)) <= 1e-5);
}
