// Prints one PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <string>

#include "mfgz/checks.hpp"
#include "mfgz/config.hpp"
#include "mfgz/dpp.hpp"
#include "mfgz/hji.hpp"
#include "mfgz/textio.hpp"

using namespace mfgz;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string summary(const CheckReport& rep) {
  std::string s;
  for (const CheckLine& l : rep.lines) {
    if (!s.empty()) s += "; ";
    s += (l.pass ? "" : "FAILED ") + l.property + ": " + l.measured;
  }
  return s;
}

// Zero value of the separable Gaussian game for N = 1, 2, 4.
Outcome zero_value() {
  const auto t0 = std::chrono::steady_clock::now();
  const GameConfig cfg = load_config("example1_gaussian");
  const GameSpec spec = cfg.game();
  bool ok = true;
  std::string d;
  for (std::size_t n : {1, 2, 4}) {
    GameConfig c = cfg;
    c.particles = n;
    DppConfig dc = c.dpp_config();
    dc.steps = 20;
    dc.u_resolution = dc.v_resolution = 5;
    const auto ens = c.ensemble();
    const double lo = dpp_value(spec, ens, ValueKind::lower, dc).value;
    const double up = dpp_value(spec, ens, ValueKind::upper, dc).value;
    ok &= std::abs(lo) <= 5e-2 && std::abs(up) <= 5e-2 && std::abs(lo - up) <= 1e-9;
    d += "N=" + std::to_string(n) + " lower " + fmt(lo) + " upper " + fmt(up) + "; ";
  }
  const double secs = seconds_since(t0);
  ok &= secs <= 60.0;
  return {ok, d + "runtime " + fmt(secs) + " s (limits |value| <= 5e-2, |lower - upper| <= 1e-9, 60 s)"};
}

// Dirac sine game on 401 nodes: terminal slice, profile drift, self-convergence.
Outcome dirac_surface() {
  const auto t0 = std::chrono::steady_clock::now();
  const GameConfig cfg = load_config("example2_dirac");
  const GameSpec spec = cfg.game();
  auto solve = [&](std::size_t points, std::size_t snaps) {
    const HjiSolver s(spec, cfg.hji_grid(points), cfg.z_measure(), cfg.scheme_config());
    return std::pair(s.grid(), s.solve(ValueKind::lower, snaps));
  };
  const auto [grid, sol] = solve(401, 11);

  double terminal_dev = 0.0;
  for (std::size_t k = 0; k < grid.node_count(); ++k)
    terminal_dev = std::max(terminal_dev, std::abs(sol.snapshots.front().values[k] - std::sin(grid.axis(0).coord(k))));

  // the zero crossing of the sine profile drifts left and the amplitude grows as t decreases
  std::vector<double> crossing, spread;
  bool single = true;
  for (const HjiSnapshot& s : sol.snapshots) {
    std::vector<double> zs;
    for (std::size_t k = 0; k + 1 < grid.node_count(); ++k) {
      const double a = s.values[k], b = s.values[k + 1];
      if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0))
        zs.push_back(grid.axis(0).coord(k) - a * grid.axis(0).spacing() / (b - a));
    }
    single &= zs.size() == 1;
    crossing.push_back(zs.empty() ? 0.0 : zs.front());
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    spread.push_back(*hi - *lo);
  }
  bool monotone = single;
  for (std::size_t i = 1; i < crossing.size(); ++i) monotone &= crossing[i] < crossing[i - 1] && spread[i] > spread[i - 1];

  auto restricted_diff = [&](std::size_t coarse) {
    const auto a = solve(coarse, 2).second.field.values;
    const auto b = solve(2 * coarse - 1, 2).second.field.values;
    double m = 0.0;
    for (std::size_t k = 0; k < coarse; ++k) m = std::max(m, std::abs(a[k] - b[2 * k]));
    return m;
  };
  const double d1 = restricted_diff(101), d2 = restricted_diff(201);
  const double secs = seconds_since(t0);
  const bool ok = terminal_dev == 0.0 && monotone && d2 < d1 && secs <= 30.0;
  return {ok, "t=1 slice max|V - sin| " + fmt(terminal_dev) + "; zero crossing " + fmt(crossing.front()) + " -> " +
                  fmt(crossing.back()) + ", range " + fmt(spread.front()) + " -> " + fmt(spread.back()) +
                  (monotone ? " (monotone in t)" : " (NOT monotone in t)") + "; |V101-V201| " + fmt(d1) +
                  ", |V201-V401| " + fmt(d2) + "; runtime " + fmt(secs) + " s"};
}

Outcome isaacs() {
  const CheckReport rep = check_isaacs(load_config("example1_gaussian"), 0, 50);
  const double gap_sep = [&] {
    for (const CheckLine& l : rep.lines)
      if (l.property.rfind("max |H+ - H-|", 0) == 0) return l.pass ? 0.0 : 1.0;
    return 1.0;
  }();
  const GameConfig ns = load_config("nonseparable");
  DppConfig d = ns.dpp_config();
  d.mode = DppMode::exact;
  d.steps = 1;
  d.u_resolution = d.v_resolution = 2;
  const double tau = ns.horizon;
  const double lo = dpp_value(ns.game(), ns.ensemble(), ValueKind::lower, d).value;
  const double up = dpp_value(ns.game(), ns.ensemble(), ValueKind::upper, d).value;
  const bool ok = rep.passed() && gap_sep == 0.0 && up - lo >= 0.5 * tau;
  return {ok, summary(rep) + "; quadratic coupling S=1: upper - lower " + fmt(up - lo) + " vs 0.5 tau " +
                  fmt(0.5 * tau)};
}

Outcome dpp_oracle() {
  bool ok = true;
  std::string d;
  for (const char* name : {"example2_dirac", "example1_gaussian", "mean_variance", "nonseparable", "terminal_only"}) {
    GameConfig c = load_config(name);
    const CheckReport rep = check_dpp_oracle(c);
    ok &= rep.passed();
    d += std::string(name) + (rep.passed() ? " ok" : " FAILED (" + summary(rep) + ")") + "; ";
  }
  return {ok, d};
}

Outcome law_invariance() {
  const GameConfig cfg = load_config("example1_gaussian");
  const GameSpec spec = cfg.game();
  std::mt19937_64 rng(0);
  const auto x = cfg.x_law.measure(1, 4);
  const auto z = cfg.z_measure();
  const TargetedEnsemble base(x, z);

  const TimeMesh mesh(0.0, spec.horizon(), 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ControlPath u = ControlPath::constant(mesh, std::vector<double>{0.0});
  ControlPath v = ControlPath::constant(mesh, std::vector<double>{0.0});
  for (double& a : u.values) a = unit(rng);
  for (double& a : v.values) a = unit(rng);
  const double j0 = evaluate_objective(spec, base, 0.0, u, v);

  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> p(4);
  for (double& a : p) a = n01(rng);
  const auto ug = control_grid(spec.u_box(), 5), vg = control_grid(spec.v_box(), 5);
  const double h0 = hamiltonian_lower(spec, 0.3, x, Costate{1, p}, ug, vg).value;
  const double k0 = hamiltonian_upper(spec, 0.3, x, Costate{1, p}, ug, vg).value;

  DppConfig ex = cfg.dpp_config();
  ex.mode = DppMode::exact;
  ex.steps = 2;
  ex.u_resolution = ex.v_resolution = 3;
  const double d0 = dpp_value(spec, base, ValueKind::lower, ex).value;
  DppConfig gr = cfg.dpp_config();
  gr.steps = 4;
  gr.u_resolution = gr.v_resolution = 3;
  gr.grid_points = 7;
  const TargetedEnsemble base3(cfg.x_law.measure(1, 3), z);
  const double g0 = dpp_value(spec, base3, ValueKind::upper, gr).value;

  double dev_j = 0, dev_h = 0, dev_d = 0, dev_g = 0;
  std::vector<std::size_t> perm(4), perm3(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto xp = x.permuted(perm);
    const TargetedEnsemble e(xp, z);
    std::vector<double> pp;
    for (std::size_t i : perm) pp.push_back(p[i]);
    dev_j = std::max(dev_j, std::abs(evaluate_objective(spec, e, 0.0, u, v) - j0));
    dev_h = std::max(dev_h, std::abs(hamiltonian_lower(spec, 0.3, xp, Costate{1, pp}, ug, vg).value - h0));
    dev_h = std::max(dev_h, std::abs(hamiltonian_upper(spec, 0.3, xp, Costate{1, pp}, ug, vg).value - k0));
    dev_d = std::max(dev_d, std::abs(dpp_value(spec, e, ValueKind::lower, ex).value - d0));
    if (trial % 20 == 0) {
      std::iota(perm3.begin(), perm3.end(), 0);
      std::shuffle(perm3.begin(), perm3.end(), rng);
      const TargetedEnsemble e3(base3.x_measure.permuted(perm3), z);
      dev_g = std::max(dev_g, std::abs(dpp_value(spec, e3, ValueKind::upper, gr).value - g0));
    }
  }
  const double worst = std::max({dev_j, dev_h, dev_d, dev_g});
  return {worst <= 1e-12, "100 permutations: J " + fmt(dev_j) + ", Hamiltonians " + fmt(dev_h) + ", exact DPP " +
                              fmt(dev_d) + ", grid DPP (5 runs) " + fmt(dev_g)};
}

Outcome from_suite(const char* config, const char* suite) {
  const CheckReport rep = run_suite(suite, load_config(config), 0);
  return {rep.passed(), std::string(config) + ": " + summary(rep)};
}

Outcome comparison() {
  const Outcome a = from_suite("example1_gaussian", "comparison");
  const Outcome b = from_suite("example2_dirac", "comparison");
  return {a.pass && b.pass, a.detail + " | " + b.detail};
}

Outcome cross_route() {
  const GameConfig cfg = load_config("example2_dirac");
  bool ok = true;
  std::string d;
  for (ValueKind k : {ValueKind::lower, ValueKind::upper}) {
    const CrossValidation cv =
        cross_validate_vs_hji(cfg.game(), cfg.ensemble(), k, cfg.dpp_config(), cfg.hji_grid(), cfg.scheme_config());
    ok &= cv.discrepancy <= 5e-2;
    d += std::string(k == ValueKind::lower ? "lower" : "upper") + ": dpp " + fmt(cv.dpp) + " (S=" +
         std::to_string(cv.dpp_steps) + ", " + std::to_string(cv.dpp_points) + " pts) hji " + fmt(cv.hji) + " (" +
         std::to_string(cv.hji_steps) + " steps, " + std::to_string(cv.hji_points) + " pts) diff " +
         fmt(cv.discrepancy) + "; ";
  }
  return {ok, d};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {
      zero_value,
      dirac_surface,
      isaacs,
      dpp_oracle,
      law_invariance,
      [] { return from_suite("example1_gaussian", "flow"); },
      comparison,
      [] { return from_suite("example1_gaussian", "metric"); },
      [] { return from_suite("example1_gaussian", "gradient"); },
      cross_route,
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail << ")" << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria pass" << std::endl;
  return failed ? 1 : 0;
}
