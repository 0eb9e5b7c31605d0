#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfgz/game.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

enum class ValueKind { lower, upper };

/// Per-atom costate p(x_i) in R^n, aligned with a measure's atoms. This is the
/// atomwise representation of the measure derivative.
struct Costate {
  std::size_t dim = 0;
  std::vector<double> values;  // atoms x dim

  std::size_t size() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> at(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  static Costate constant(std::size_t atoms, std::size_t dim, double value) {
    return Costate{dim, std::vector<double>(atoms * dim, value)};
  }
};

struct HamiltonianEval {
  double value = 0.0;
  std::size_t arg_u = 0;
  std::size_t arg_v = 0;
  ValueKind kind = ValueKind::lower;
};

/// Exact extremum of a payoff matrix (row-major, rows = u index, cols = v index).
/// lower: sup_v inf_u, upper: inf_u sup_v. The inner problem is resolved first
/// and ties go to the lowest index at both levels.
HamiltonianEval extremize(ValueKind kind, std::span<const double> payoff, std::size_t nu, std::size_t nv);

/// For lower: best u index per v index (the minimizer's response table).
/// For upper: best v index per u index.
std::vector<std::size_t> best_responses(ValueKind kind, std::span<const double> payoff, std::size_t nu,
                                        std::size_t nv);

/// Payoff matrix sum_i w_i [<p_i, f(t,x_i,nu,u,v)> + l(t,x_i,nu,u,v)] over both grids.
std::vector<double> hamiltonian_payoff(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x,
                                       const Costate& p, const ControlGrid& u_grid, const ControlGrid& v_grid);

HamiltonianEval hamiltonian_lower(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x, const Costate& p,
                                  const ControlGrid& u_grid, const ControlGrid& v_grid);
HamiltonianEval hamiltonian_upper(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x, const Costate& p,
                                  const ControlGrid& u_grid, const ControlGrid& v_grid);

/// Lifted form: the expectation over the probability space carrying (x, z).
/// The integrand is built as a random variable first, then integrated.
HamiltonianEval lifted_hamiltonian(ValueKind kind, const GameSpec& spec, double t, const TargetedEnsemble& ensemble,
                                   const Costate& p, const ControlGrid& u_grid, const ControlGrid& v_grid);

struct HamiltonianSample {
  double t = 0.0;
  EmpiricalMeasure nu_x;
  Costate p;
};

/// max over samples of |H+ - H-|.
double isaacs_check(const GameSpec& spec, std::span<const HamiltonianSample> samples, const ControlGrid& u_grid,
                    const ControlGrid& v_grid);

}  // namespace mfgz
