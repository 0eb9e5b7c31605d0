#include <doctest.h>

#include <cmath>
#include <random>

#include "mfgz/hamiltonian.hpp"
#include "mfgz/lifted.hpp"
#include "support.hpp"

using namespace mfgz;

namespace {

struct Setup {
  GameSpec spec;
  ControlGrid ug, vg;
  Setup(const std::string& text, std::size_t r)
      : spec(test::config_of(text).game()), ug(control_grid(spec.u_box(), r)), vg(control_grid(spec.v_box(), r)) {}
};

const char* kSineDrift = "1/(1+x1*x1) + feature(mean_sin) + u1 - 0.1*v1";
const char* kSineCost = "sin(x1) + feature(mean) + u1 - v1";

}  // namespace

TEST_CASE("extremize orders and ties") {
  // rows u, cols v
  const double pay[] = {1, 5, 3, 2};
  const auto lo = extremize(ValueKind::lower, pay, 2, 2);
  const auto up = extremize(ValueKind::upper, pay, 2, 2);
  CHECK(lo.value == 2.0);  // max(min(1,3), min(5,2))
  CHECK(up.value == 3.0);  // min(max(1,5), max(3,2))
  CHECK(lo.arg_u == 1);
  CHECK(lo.arg_v == 1);
  const double flat[] = {0, 0, 0, 0};
  const auto t = extremize(ValueKind::upper, flat, 2, 2);
  CHECK(t.arg_u == 0);
  CHECK(t.arg_v == 0);
  CHECK(best_responses(ValueKind::lower, pay, 2, 2) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("small Hamiltonians") {
  const auto d0 = EmpiricalMeasure::dirac({0.0});
  const Costate p0 = Costate::constant(1, 1, 0.0);
  Setup a(test::game1d("0", "u1 - v1", "0"), 2);
  CHECK(hamiltonian_lower(a.spec, 0.0, d0, p0, a.ug, a.vg).value == 0.0);
  CHECK(hamiltonian_upper(a.spec, 0.0, d0, p0, a.ug, a.vg).value == 0.0);

  Setup b(test::game1d("u1", "0", "0"), 3);
  const Costate p1 = Costate::constant(1, 1, 1.0);
  CHECK(hamiltonian_lower(b.spec, 0.0, d0, p1, b.ug, b.vg).value == 0.0);
}

TEST_CASE("bilinear and quadratic couplings") {
  const auto d0 = EmpiricalMeasure::dirac({0.0});
  const Costate p0 = Costate::constant(1, 1, 0.0);
  const GameConfig bil = test::config_of(
      "dim = 1\nf = 0\nl = u1*v1\nm = 0\nU = -1 1\nV = -1 1\nx_law = dirac 0\nz_law = dirac 0\n");
  const GameSpec s = bil.game();
  const auto ug = control_grid(s.u_box(), 3), vg = control_grid(s.v_box(), 3);
  CHECK(hamiltonian_lower(s, 0.0, d0, p0, ug, vg).value == 0.0);
  CHECK(hamiltonian_upper(s, 0.0, d0, p0, ug, vg).value == 0.0);

  Setup q(test::game1d("0", "(u1-v1)*(u1-v1)", "0"), 2);
  CHECK(hamiltonian_lower(q.spec, 0.0, d0, p0, q.ug, q.vg).value == 0.0);
  CHECK(hamiltonian_upper(q.spec, 0.0, d0, p0, q.ug, q.vg).value == 1.0);
  const HamiltonianSample sample{0.0, d0, p0};
  CHECK(isaacs_check(q.spec, std::span(&sample, 1), q.ug, q.vg) == 1.0);

  Setup z(test::game1d("0", "0", "0"), 3);
  CHECK(isaacs_check(z.spec, std::span(&sample, 1), z.ug, z.vg) == 0.0);
}

TEST_CASE("separable game satisfies the Isaacs condition") {
  Setup g(test::game1d(kSineDrift, kSineCost, "0"), 5);
  QuantizationSpec q;
  q.atom_count = 6;
  const auto nu = quantize(q);
  CHECK(hamiltonian_lower(g.spec, 0.0, nu, Costate::constant(6, 1, 0.0), g.ug, g.vg).value ==
        doctest::Approx(0.0).epsilon(1e-15));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<HamiltonianSample> samples;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> atoms, p;
    for (int i = 0; i < 4; ++i) atoms.push_back(n01(rng)), p.push_back(n01(rng));
    samples.push_back({0.02 * k, EmpiricalMeasure::uniform(1, atoms), Costate{1, p}});
  }
  CHECK(isaacs_check(g.spec, samples, g.ug, g.vg) <= 1e-12);
}

TEST_CASE("lifted form equals the measure form and ignores atom order") {
  Setup g(test::game1d(kSineDrift, kSineCost, "0"), 5);
  QuantizationSpec q;
  q.atom_count = 8;
  const auto nu = quantize(q);
  std::vector<double> p;
  for (int i = 0; i < 8; ++i) p.push_back(0.3 * i - 1.0);
  const Costate cs{1, p};
  const TargetedEnsemble ens(nu, EmpiricalMeasure::dirac({0.0}));
  for (ValueKind k : {ValueKind::lower, ValueKind::upper}) {
    const double a = lifted_hamiltonian(k, g.spec, 0.2, ens, cs, g.ug, g.vg).value;
    const double b = (k == ValueKind::lower ? hamiltonian_lower : hamiltonian_upper)(g.spec, 0.2, nu, cs, g.ug, g.vg).value;
    CHECK(std::abs(a - b) <= 1e-14);
    const std::size_t perm[] = {3, 7, 0, 5, 1, 6, 2, 4};
    std::vector<double> pp;
    for (std::size_t i : perm) pp.push_back(p[i]);
    const double c = (k == ValueKind::lower ? hamiltonian_lower : hamiltonian_upper)(g.spec, 0.2, nu.permuted(perm),
                                                                                     Costate{1, pp}, g.ug, g.vg)
                         .value;
    CHECK(std::abs(b - c) <= 1e-12);
  }
}

TEST_CASE("control grid refinement") {
  Setup coarse(test::game1d(kSineDrift, "sin(x1) + u1*u1 - v1*v1 + u1*v1", "0"), 5);
  const auto nu = EmpiricalMeasure::uniform(1, {-0.5, 0.9});
  const Costate p{1, {0.4, -1.2}};
  auto h = [&](std::size_t r) {
    const auto ug = control_grid(coarse.spec.u_box(), r), vg = control_grid(coarse.spec.v_box(), r);
    return hamiltonian_lower(coarse.spec, 0.0, nu, p, ug, vg).value;
  };
  CHECK(std::abs(h(17) - h(33)) <= std::abs(h(5) - h(9)));
}
