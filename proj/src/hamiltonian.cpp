#include "mfgz/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "mfgz/errors.hpp"

namespace mfgz {

HamiltonianEval extremize(ValueKind kind, std::span<const double> payoff, std::size_t nu, std::size_t nv) {
  if (nu == 0 || nv == 0) throw InvalidArgument("extremize: empty control grid");
  if (payoff.size() != nu * nv) throw InvalidArgument("extremize: payoff size mismatch");
  HamiltonianEval best;
  best.kind = kind;
  if (kind == ValueKind::lower) {
    for (std::size_t j = 0; j < nv; ++j) {
      std::size_t arg = 0;
      double inner = payoff[j];
      for (std::size_t i = 1; i < nu; ++i) {
        if (payoff[i * nv + j] < inner) {
          inner = payoff[i * nv + j];
          arg = i;
        }
      }
      if (j == 0 || inner > best.value) {
        best.value = inner;
        best.arg_u = arg;
        best.arg_v = j;
      }
    }
  } else {
    for (std::size_t i = 0; i < nu; ++i) {
      std::size_t arg = 0;
      double inner = payoff[i * nv];
      for (std::size_t j = 1; j < nv; ++j) {
        if (payoff[i * nv + j] > inner) {
          inner = payoff[i * nv + j];
          arg = j;
        }
      }
      if (i == 0 || inner < best.value) {
        best.value = inner;
        best.arg_u = i;
        best.arg_v = arg;
      }
    }
  }
  return best;
}

std::vector<std::size_t> best_responses(ValueKind kind, std::span<const double> payoff, std::size_t nu,
                                        std::size_t nv) {
  if (payoff.size() != nu * nv) throw InvalidArgument("best_responses: payoff size mismatch");
  std::vector<std::size_t> table;
  if (kind == ValueKind::lower) {
    for (std::size_t j = 0; j < nv; ++j) {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < nu; ++i)
        if (payoff[i * nv + j] < payoff[arg * nv + j]) arg = i;
      table.push_back(arg);
    }
  } else {
    for (std::size_t i = 0; i < nu; ++i) {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < nv; ++j)
        if (payoff[i * nv + j] > payoff[i * nv + arg]) arg = j;
      table.push_back(arg);
    }
  }
  return table;
}

namespace {

void check_inputs(const GameSpec& spec, const EmpiricalMeasure& nu_x, const Costate& p, const ControlGrid& u_grid,
                  const ControlGrid& v_grid) {
  if (u_grid.size() == 0 || v_grid.size() == 0) throw InvalidArgument("Hamiltonian: control grid is empty");
  if (u_grid.dim != spec.u_box().dim() || v_grid.dim != spec.v_box().dim())
    throw InvalidArgument("Hamiltonian: control grid dimension mismatch");
  if (nu_x.dim() != spec.dim()) throw InvalidArgument("Hamiltonian: measure dimension mismatch");
  if (p.dim != spec.dim() || p.size() != nu_x.size())
    throw InvalidArgument("Hamiltonian: costate is not aligned with the measure atoms");
}

// Integrand <p_i, f_i> + l_i at every atom for one control pair.
void integrand(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x, const MeasureFeatures& features,
               const Costate& p, std::span<const double> u, std::span<const double> v, std::vector<double>& drift,
               std::vector<double>& out) {
  const std::size_t n = spec.dim();
  out.resize(nu_x.size());
  drift.resize(n);
  for (std::size_t i = 0; i < nu_x.size(); ++i) {
    const auto x = nu_x.atom(i);
    eval_drift(spec, t, x, features, u, v, drift);
    double dot = 0.0;
    const auto pi = p.at(i);
    for (std::size_t k = 0; k < n; ++k) dot += pi[k] * drift[k];
    out[i] = dot + eval_running_cost(spec, t, x, features, u, v);
  }
}

}  // namespace

std::vector<double> hamiltonian_payoff(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x,
                                       const Costate& p, const ControlGrid& u_grid, const ControlGrid& v_grid) {
  check_inputs(spec, nu_x, p, u_grid, v_grid);
  const MeasureFeatures features = compute_features(nu_x, spec.dynamic_features());
  const std::size_t nu = u_grid.size();
  const std::size_t nv = v_grid.size();
  std::vector<double> payoff(nu * nv);
  std::vector<double> drift(spec.dim());
  const std::size_t n = spec.dim();
  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      double total = 0.0;
      for (std::size_t i = 0; i < nu_x.size(); ++i) {
        const auto x = nu_x.atom(i);
        eval_drift(spec, t, x, features, u_grid.point(iu), v_grid.point(iv), drift);
        double dot = 0.0;
        const auto pi = p.at(i);
        for (std::size_t k = 0; k < n; ++k) dot += pi[k] * drift[k];
        const double term = dot + eval_running_cost(spec, t, x, features, u_grid.point(iu), v_grid.point(iv));
        total += nu_x.weight(i) * term;
      }
      payoff[iu * nv + iv] = total;
    }
  }
  return payoff;
}

HamiltonianEval hamiltonian_lower(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x, const Costate& p,
                                  const ControlGrid& u_grid, const ControlGrid& v_grid) {
  const auto payoff = hamiltonian_payoff(spec, t, nu_x, p, u_grid, v_grid);
  return extremize(ValueKind::lower, payoff, u_grid.size(), v_grid.size());
}

HamiltonianEval hamiltonian_upper(const GameSpec& spec, double t, const EmpiricalMeasure& nu_x, const Costate& p,
                                  const ControlGrid& u_grid, const ControlGrid& v_grid) {
  const auto payoff = hamiltonian_payoff(spec, t, nu_x, p, u_grid, v_grid);
  return extremize(ValueKind::upper, payoff, u_grid.size(), v_grid.size());
}

HamiltonianEval lifted_hamiltonian(ValueKind kind, const GameSpec& spec, double t, const TargetedEnsemble& ensemble,
                                   const Costate& p, const ControlGrid& u_grid, const ControlGrid& v_grid) {
  const EmpiricalMeasure& x = ensemble.x_measure;
  check_inputs(spec, x, p, u_grid, v_grid);
  const MeasureFeatures features = compute_features(x, spec.dynamic_features());
  const std::size_t nu = u_grid.size();
  const std::size_t nv = v_grid.size();
  std::vector<double> payoff(nu * nv);
  std::vector<double> drift;
  std::vector<double> sample;
  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      integrand(spec, t, x, features, p, u_grid.point(iu), v_grid.point(iv), drift, sample);
      // E[Y] over the atoms of the probability space (z does not enter the integrand).
      double expectation = 0.0;
      for (std::size_t i = 0; i < sample.size(); ++i) expectation += x.weight(i) * sample[i];
      payoff[iu * nv + iv] = expectation;
    }
  }
  return extremize(kind, payoff, nu, nv);
}

double isaacs_check(const GameSpec& spec, std::span<const HamiltonianSample> samples, const ControlGrid& u_grid,
                    const ControlGrid& v_grid) {
  double gap = 0.0;
  for (const HamiltonianSample& s : samples) {
    const auto payoff = hamiltonian_payoff(spec, s.t, s.nu_x, s.p, u_grid, v_grid);
    const double lower = extremize(ValueKind::lower, payoff, u_grid.size(), v_grid.size()).value;
    const double upper = extremize(ValueKind::upper, payoff, u_grid.size(), v_grid.size()).value;
    gap = std::max(gap, std::abs(upper - lower));
  }
  return gap;
}

}  // namespace mfgz
