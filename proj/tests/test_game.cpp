#include <doctest.h>

#include <cmath>

#include "mfgz/config.hpp"
#include "mfgz/errors.hpp"
#include "mfgz/expression.hpp"
#include "mfgz/game.hpp"
#include "support.hpp"

using namespace mfgz;

TEST_CASE("expressions parse and evaluate") {
  const double x[] = {0.5};
  const double u[] = {0.25};
  const double v[] = {1.0};
  const double z[] = {0.1};
  MeasureFeatures feats;
  feats.mean = {2.0};
  feats.mean_sin = 0.3;
  EvalContext ctx;
  ctx.x = x;
  ctx.u = u;
  ctx.v = v;
  ctx.z = z;
  ctx.features = &feats;

  CHECK(Expression::parse("0").evaluate(ctx) == 0.0);
  CHECK(Expression::parse("0").is_constant());
  CHECK(Expression::parse("sin(x1) - z1").evaluate(ctx) == doctest::Approx(std::sin(0.5) - 0.1));
  CHECK(Expression::parse("1/(1+x1*x1) + feature(mean_sin) + u1 - 0.1*v1").evaluate(ctx) ==
        doctest::Approx(1.0 / 1.25 + 0.3 + 0.25 - 0.1));
  CHECK(Expression::parse("-2^2").evaluate(ctx) == doctest::Approx(-4.0));
  CHECK(Expression::parse("2^3^2").evaluate(ctx) == doctest::Approx(512.0));
  CHECK(Expression::parse("feature(mean, 1) * pi").evaluate(ctx) == doctest::Approx(2.0 * M_PI));
  CHECK(Expression::parse("sqrt(abs(-9)) + exp(0) + cos(0)").evaluate(ctx) == doctest::Approx(5.0));
}

TEST_CASE("expression errors carry positions") {
  CHECK_THROWS_AS(Expression::parse("x1 +"), ParseError);
  CHECK_THROWS_AS(Expression::parse("foo(x1)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("x0"), ParseError);
  CHECK_THROWS_AS(Expression::parse("feature(median)"), ParseError);
  try {
    Expression::parse("x1 * * 2");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 6);
  }
  EvalContext ctx;
  const double x[] = {0.0};
  ctx.x = x;
  CHECK_THROWS_AS(Expression::parse("1/x1").evaluate(ctx), EvalError);
}

TEST_CASE("symbolic derivatives") {
  const double x[] = {0.7};
  EvalContext ctx;
  ctx.x = x;
  const auto e = Expression::parse("sin(x1) * x1^3");
  const auto d = e.derivative(VarKind::x, 0);
  CHECK(d.evaluate(ctx) == doctest::Approx(std::cos(0.7) * std::pow(0.7, 3) + 3 * std::sin(0.7) * 0.49));
  CHECK_THROWS_AS(Expression::parse("abs(x1)").derivative(VarKind::x, 0), InvalidArgument);
}

TEST_CASE("control grids are lexicographic tensors") {
  ControlBox box{{{0.0, 1.0}}};
  auto g2 = control_grid(box, 2);
  CHECK(g2.points == std::vector<double>{0.0, 1.0});
  CHECK(control_grid(box, 3).points == std::vector<double>{0.0, 0.5, 1.0});
  ControlBox sq{{{0.0, 1.0}, {0.0, 1.0}}};
  CHECK(control_grid(sq, 2).points == std::vector<double>{0, 0, 0, 1, 1, 0, 1, 1});
  ControlBox single{{{0.5, 0.5}}};
  CHECK(control_grid(single, 5).size() == 1);
}

TEST_CASE("drift and costs") {
  const GameConfig cfg = test::config_of(test::game1d("1/(1+x1*x1) + feature(mean_sin) + u1 - 0.1*v1", "0", "sin(x1) - z1"));
  const GameSpec spec = cfg.game();
  const double x0[] = {0.0};
  const double zero[] = {0.0};
  const auto sym = EmpiricalMeasure::uniform(1, {-0.8, 0.8});
  CHECK(eval_f(spec, 0.0, x0, sym, zero, zero)[0] == doctest::Approx(1.0));

  const GameSpec mean_drift = test::config_of(test::game1d("feature(mean)", "0", "0")).game();
  const auto a13 = EmpiricalMeasure::uniform(1, {1.0, 3.0});
  CHECK(eval_f(mean_drift, 0.0, x0, a13, zero, zero)[0] == doctest::Approx(2.0));

  // terminal expectations
  const TargetedEnsemble sym_ens(EmpiricalMeasure::uniform(1, {-0.4, 0.4}), EmpiricalMeasure::uniform(1, {-1.0, 1.0}));
  CHECK(eval_terminal_cost(spec, sym_ens, sym_ens.x_measure.atoms()) == doctest::Approx(0.0));
  const GameSpec mx = test::config_of(test::game1d("0", "0", "x1")).game();
  CHECK(eval_terminal_cost(mx, TargetedEnsemble(a13, EmpiricalMeasure::dirac({5.0})), a13.atoms()) == 2.0);
  const TargetedEnsemble half_pi(EmpiricalMeasure::dirac({M_PI / 2}), EmpiricalMeasure::dirac({0.0}));
  CHECK(eval_terminal_cost(spec, half_pi, half_pi.x_measure.atoms()) == doctest::Approx(1.0));
}

TEST_CASE("controls outside their boxes are rejected") {
  const GameSpec spec = test::config_of(test::game1d("u1", "0", "0")).game();
  const double x0[] = {0.0};
  const double bad[] = {1.5};
  const double ok[] = {0.5};
  CHECK_THROWS_AS(eval_f(spec, 0.0, x0, EmpiricalMeasure::dirac({0.0}), bad, ok), InvalidArgument);
}

TEST_CASE("config parsing") {
  const GameConfig cfg = test::config_of(test::game1d("u1 - v1", "0", "x1", "gaussian 0 1", "particles = 4\ngrid = -3 3 61\n"));
  CHECK(cfg.particle_count() == 4);
  CHECK(cfg.x_measure().size() == 4);
  CHECK(cfg.hji_grid().axis_count() == 4);
  CHECK(cfg.hji_grid(11).axis(0).points == 11);

  CHECK_THROWS_AS(test::config_of("dim = 1\nbogus = 3\n"), ParseError);
  CHECK_THROWS_AS(test::config_of(test::game1d("0", "0", "0") + "dim = 1\n"), ParseError);
  CHECK_THROWS_AS(test::config_of("dim = 1\nf = 0\n"), ParseError);
  try {
    std::string text = test::game1d("0", "0", "0");
    text.replace(text.find("U = 0 1"), 7, "U = 1 0");
    test::config_of(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  const GameConfig atoms = test::config_of(
      "dim = 2\nf = 0; 0\nm = 0\nU = 0 1\nV = 0 1\nx_law = atoms 1 0 | 0 1\nz_law = dirac 0 0\n");
  CHECK(atoms.particle_count() == 2);
  CHECK(atoms.x_measure().atom(1)[1] == 1.0);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"example1_gaussian", "example2_dirac", "mean_variance", "vehicles", "nonseparable",
                           "terminal_only"}) {
    CAPTURE(name);
    const GameConfig cfg = load_config(name);
    CHECK_NOTHROW(cfg.game());
    CHECK_NOTHROW(cfg.ensemble());
  }
  CHECK_THROWS_AS(load_config("no_such_config"), InvalidArgument);
}
