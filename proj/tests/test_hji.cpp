#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfgz/config.hpp"
#include "mfgz/errors.hpp"
#include "mfgz/grid.hpp"
#include "mfgz/hji.hpp"
#include "support.hpp"

using namespace mfgz;

TEST_CASE("grid interpolation") {
  const SpatialGrid g({{0.0, 1.0, 3}, {-1.0, 1.0, 5}});
  CHECK(g.node_count() == 15);
  std::vector<double> vals(15);
  double c[2];
  for (std::size_t n = 0; n < 15; ++n) {
    g.node_coords(n, c);
    vals[n] = 2 * c[0] - 3 * c[1] + 0.5;
  }
  const double p[] = {0.3, 0.77};
  CHECK(g.interpolate(vals, p) == doctest::Approx(2 * 0.3 - 3 * 0.77 + 0.5));
  const double edge[] = {1.0 + 1e-12, -1.0};
  CHECK_NOTHROW(g.interpolate(vals, edge));
  const double out[] = {1.2, 0.0};
  CHECK_THROWS_AS(g.interpolate(vals, out), GridExcursion);
  CHECK_THROWS_AS(SpatialGrid({{0.0, 1.0, 2}}), InvalidArgument);
}

TEST_CASE("terminal fields") {
  const GameConfig c = load_config("example2_dirac");
  const GameSpec spec = c.game();
  const SpatialGrid grid = c.hji_grid();
  const auto f = terminal_field(spec, grid, EmpiricalMeasure::dirac({0.0}));
  for (std::size_t n = 0; n < grid.node_count(); n += 37) CHECK(f.values[n] == std::sin(grid.axis(0).coord(n)));

  QuantizationSpec q;
  q.atom_count = 51;
  const auto fz = terminal_field(spec, grid, quantize(q));
  for (std::size_t n = 0; n < grid.node_count(); n += 37)
    CHECK(std::abs(fz.values[n] - std::sin(grid.axis(0).coord(n))) <= 1e-12);

  const GameSpec mx = test::config_of(test::game1d("0", "0", "x1")).game();
  const SpatialGrid g2({{-1.0, 1.0, 5}, {-1.0, 1.0, 5}});
  const auto f2 = terminal_field(mx, g2, EmpiricalMeasure::dirac({0.0}));
  double xy[2];
  for (std::size_t n = 0; n < g2.node_count(); ++n) {
    g2.node_coords(n, xy);
    CHECK(f2.values[n] == doctest::Approx((xy[0] + xy[1]) / 2));
  }
}

TEST_CASE("trivial dynamics") {
  const SpatialGrid grid({{-1.0, 1.0, 21}});
  const GameSpec still = test::config_of(test::game1d("0", "0", "x1")).game();
  SchemeConfig sc;
  sc.steps = 4;
  const HjiSolver s0(still, grid, EmpiricalMeasure::dirac({0.0}), sc);
  const auto term = s0.terminal_field(ValueKind::lower);
  CHECK(s0.step_backward(term).values == term.values);
  const auto sol = s0.solve(ValueKind::upper, 3);
  CHECK(sol.field.values == term.values);

  const GameSpec unit = test::config_of(test::game1d("0", "1", "x1")).game();
  const HjiSolver s1(unit, grid, EmpiricalMeasure::dirac({0.0}), sc);
  const auto t1 = s1.terminal_field(ValueKind::lower);
  const auto next = s1.step_backward(t1);
  for (std::size_t n = 0; n < grid.node_count(); ++n) CHECK(next.values[n] == doctest::Approx(t1.values[n] + 0.25));
  CHECK(next.t == doctest::Approx(0.75));
}

TEST_CASE("one step against an independent scalar update") {
  // value at x = 0 after one backward step from sin(x), reference computed in python
  const GameConfig c = load_config("example2_dirac");
  const GameSpec spec = c.game();
  const HjiSolver solver(spec, c.hji_grid(), c.z_measure(), c.scheme_config());
  CHECK(solver.steps() == 261);
  for (ValueKind k : {ValueKind::lower, ValueKind::upper}) {
    const auto next = solver.step_backward(solver.terminal_field(k));
    CHECK(next.values[200] == doctest::Approx(0.00383135376788009).epsilon(1e-13));
  }
}

TEST_CASE("dirac game solution") {
  const GameConfig c = load_config("example2_dirac");
  const GameSpec spec = c.game();
  const HjiSolver solver(spec, c.hji_grid(), c.z_measure(), c.scheme_config());
  const auto lo = solver.solve(ValueKind::lower, 11);
  const auto up = solver.solve(ValueKind::upper, 11);
  CHECK(lo.snapshots.size() == 11);
  CHECK(lo.snapshots.front().t == 1.0);
  CHECK(lo.max_principle_ok());
  CHECK(lo.cfl_number <= 0.9);
  double gap = 0.0;
  for (std::size_t n = 0; n < lo.field.values.size(); ++n)
    gap = std::max(gap, std::abs(lo.field.values[n] - up.field.values[n]));
  CHECK(gap <= 1e-9);
  const double at0 = field_value_at(lo.field, c.x_measure().atoms());
  CHECK(at0 == doctest::Approx(2.06).epsilon(0.01));

  std::ostringstream csv, mat;
  write_snapshots_csv(csv, solver.grid(), lo.snapshots);
  write_surface_matrix(mat, solver.grid(), lo.snapshots);
  CHECK(csv.str().rfind("t,x1,value\n", 0) == 0);
  const std::string m = mat.str();
  CHECK(std::count(m.begin(), m.end(), '\n') == 12);
}

TEST_CASE("comparison ordering") {
  const GameConfig c = load_config("example2_dirac");
  const GameSpec spec = c.game();
  const SpatialGrid grid({{-2.0, 2.0, 81}});
  const Expression m = Expression::parse("sin(x1) - z1");
  const auto z = c.z_measure();
  const SchemeConfig sc = c.scheme_config();
  CHECK(comparison_check(spec, grid, z, ValueKind::lower, sc, m, m) == 0.0);
  CHECK(comparison_check(spec, grid, z, ValueKind::lower, sc, m, Expression::parse("sin(x1) - z1 + 1")) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(comparison_check(spec, grid, z, ValueKind::upper, sc, m, Expression::parse("sin(x1) - z1 + 0.1*x1*x1")) >=
        -1e-12);
  CHECK_THROWS_AS(comparison_check(spec, grid, z, ValueKind::lower, sc, m, Expression::parse("sin(x1) - z1 - 0.1")),
                  InvalidArgument);
}

TEST_CASE("two-particle lift is symmetric") {
  const GameConfig c = load_config("example1_gaussian");
  const GameSpec spec = c.game();
  const SpatialGrid grid = c.hji_grid(31);
  const HjiSolver solver(spec, grid, c.z_measure(), c.scheme_config());
  CHECK(solver.particles() == 2);
  const auto sol = solver.solve(ValueKind::lower);
  double dev = 0.0;
  for (std::size_t i = 0; i < 31; ++i)
    for (std::size_t j = 0; j < 31; ++j)
      dev = std::max(dev, std::abs(sol.field.values[i * 31 + j] - sol.field.values[j * 31 + i]));
  CHECK(dev <= 1e-10);
}

TEST_CASE("solver guards") {
  const GameConfig c = load_config("example2_dirac");
  const GameSpec spec = c.game();
  SchemeConfig sc;
  sc.steps = 3;
  CHECK_THROWS_AS(HjiSolver(spec, c.hji_grid(), c.z_measure(), sc), CflViolation);
  const SpatialGrid four({{-1, 1, 3}, {-1, 1, 3}, {-1, 1, 3}, {-1, 1, 3}});
  CHECK_THROWS_AS(HjiSolver(spec, four, c.z_measure()), InvalidArgument);
}
