#include "mfgz/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "mfgz/errors.hpp"

namespace mfgz {

EnsembleStepper::EnsembleStepper(const GameSpec& spec, std::span<const double> weights, IntegratorConfig cfg)
    : spec_(spec), weights_(weights.begin(), weights.end()), cfg_(cfg) {
  if (cfg_.substeps < 1) throw InvalidArgument("integrator needs at least one substep");
}

double EnsembleStepper::rates(double t, std::span<const double> atoms, std::span<const double> u,
                              std::span<const double> v, std::vector<double>& out) {
  const std::size_t n = spec_.dim();
  const MeasureFeatures features = compute_features(n, atoms, weights_, spec_.dynamic_features());
  out.resize(atoms.size());
  double cost_rate = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const auto x = atoms.subspan(i * n, n);
    eval_drift(spec_, t, x, features, u, v, std::span<double>(out).subspan(i * n, n));
    cost_rate += weights_[i] * eval_running_cost(spec_, t, x, features, u, v);
  }
  return cost_rate;
}

double EnsembleStepper::advance(std::vector<double>& atoms, double t0, double t1, std::span<const double> u,
                                std::span<const double> v, std::size_t substeps) {
  if (atoms.size() != weights_.size() * spec_.dim()) throw InvalidArgument("advance: atom array size mismatch");
  if (substeps < 1) throw InvalidArgument("advance: need at least one substep");
  const double h = (t1 - t0) / static_cast<double>(substeps);
  const std::size_t len = atoms.size();
  double cost = 0.0;
  for (std::size_t k = 0; k < substeps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    if (cfg_.scheme == Scheme::euler) {
      const double l1 = rates(t, atoms, u, v, k1_);
      for (std::size_t i = 0; i < len; ++i) atoms[i] += h * k1_[i];
      cost += h * l1;
      continue;
    }
    tmp_.resize(len);
    const double l1 = rates(t, atoms, u, v, k1_);
    for (std::size_t i = 0; i < len; ++i) tmp_[i] = atoms[i] + 0.5 * h * k1_[i];
    const double l2 = rates(t + 0.5 * h, tmp_, u, v, k2_);
    for (std::size_t i = 0; i < len; ++i) tmp_[i] = atoms[i] + 0.5 * h * k2_[i];
    const double l3 = rates(t + 0.5 * h, tmp_, u, v, k3_);
    for (std::size_t i = 0; i < len; ++i) tmp_[i] = atoms[i] + h * k3_[i];
    const double l4 = rates(t + h, tmp_, u, v, k4_);
    for (std::size_t i = 0; i < len; ++i)
      atoms[i] += h * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]) / 6.0;
    cost += h * (l1 + 2.0 * l2 + 2.0 * l3 + l4) / 6.0;
  }
  for (double a : atoms) {
    if (!std::isfinite(a)) throw NumericFailure("particle state became non-finite");
  }
  return cost;
}

namespace {

void check_paths(const GameSpec& spec, const ControlPath& u_path, const ControlPath& v_path, double from,
                 double until) {
  const TimeMesh& m = u_path.mesh;
  if (v_path.mesh.steps != m.steps || v_path.mesh.t0 != m.t0 || v_path.mesh.t1 != m.t1)
    throw InvalidArgument("control paths must share one time mesh");
  if (u_path.values.size() != m.steps * u_path.dim || v_path.values.size() != m.steps * v_path.dim)
    throw InvalidArgument("control path has the wrong number of values");
  if (!u_path.inside(spec.u_box())) throw InvalidArgument("u path leaves U");
  if (!v_path.inside(spec.v_box())) throw InvalidArgument("v path leaves V");
  const double tol = 1e-12 * (1.0 + std::abs(m.t1));
  if (from < m.t0 - tol || until > m.t1 + tol) throw InvalidArgument("control mesh does not cover the interval");
  if (until < from) throw InvalidArgument("cannot propagate backward in time");
  if (until > spec.horizon() + tol) throw InvalidArgument("propagation beyond the horizon");
}

// Integrates segment by segment over the control mesh and returns the cost.
double integrate(const GameSpec& spec, std::vector<double>& atoms, std::span<const double> weights,
                 const ControlPath& u_path, const ControlPath& v_path, double from, double until,
                 const IntegratorConfig& cfg) {
  check_paths(spec, u_path, v_path, from, until);
  EnsembleStepper stepper(spec, weights, cfg);
  const TimeMesh& mesh = u_path.mesh;
  const double tau = mesh.step();
  const double tiny = 1e-13 * tau;
  double cost = 0.0;
  for (std::size_t k = 0; k < mesh.steps; ++k) {
    const double a = std::max(from, mesh.time(k));
    const double b = std::min(until, mesh.time(k + 1));
    if (b - a <= tiny) continue;
    const double len = b - a;
    std::size_t sub = cfg.substeps;
    if (std::abs(len - tau) > 1e-12 * tau) {
      sub = static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.substeps) * len / tau - 1e-9));
      sub = std::max<std::size_t>(sub, 1);
    }
    cost += stepper.advance(atoms, a, b, u_path.at_step(k), v_path.at_step(k), sub);
  }
  return cost;
}

}  // namespace

CostedState running_cost_accumulate(const GameSpec& spec, const ParticleState& state, const ControlPath& u_path,
                                    const ControlPath& v_path, double until, const IntegratorConfig& cfg) {
  if (state.measure.dim() != spec.dim()) throw InvalidArgument("propagate: state dimension mismatch");
  std::vector<double> atoms(state.measure.atoms().begin(), state.measure.atoms().end());
  const double cost = integrate(spec, atoms, state.measure.weights(), u_path, v_path, state.time, until, cfg);
  return CostedState{ParticleState{until, state.measure.with_atoms(std::move(atoms))}, cost};
}

ParticleState propagate(const GameSpec& spec, const ParticleState& state, const ControlPath& u_path,
                        const ControlPath& v_path, double until, const IntegratorConfig& cfg) {
  return running_cost_accumulate(spec, state, u_path, v_path, until, cfg).state;
}

double evaluate_objective(const GameSpec& spec, const TargetedEnsemble& ensemble, double t0,
                          const ControlPath& u_path, const ControlPath& v_path, const IntegratorConfig& cfg) {
  const CostedState end =
      running_cost_accumulate(spec, ParticleState{t0, ensemble.x_measure}, u_path, v_path, spec.horizon(), cfg);
  return end.cost + eval_terminal_cost(spec, ensemble, end.state.measure.atoms());
}

double check_flow_property(const GameSpec& spec, const ParticleState& state, const ControlPath& u_path,
                           const ControlPath& v_path, double r, double s, const IntegratorConfig& cfg) {
  if (!(state.time < r && r < s)) throw InvalidArgument("check_flow_property: need t < r < s");
  const ParticleState direct = propagate(spec, state, u_path, v_path, s, cfg);
  const ParticleState mid = propagate(spec, state, u_path, v_path, r, cfg);
  const ParticleState composed = propagate(spec, mid, u_path, v_path, s, cfg);
  double dev = 0.0;
  const auto a = direct.measure.atoms();
  const auto b = composed.measure.atoms();
  for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  return dev;
}

EstimateReport check_estimates(const GameSpec& spec, const EmpiricalMeasure& nu1, const EmpiricalMeasure& nu2,
                               const ControlPath& u_path, const ControlPath& v_path, const IntegratorConfig& cfg) {
  if (!spec.lipschitz_k()) throw InvalidArgument("check_estimates: the game declares no Lipschitz constant K");
  const double base = wasserstein(2, nu1, nu2);
  if (!(base > 0.0)) throw InvalidArgument("check_estimates: nu1 and nu2 must differ");
  const double k = *spec.lipschitz_k();

  EstimateReport report;
  FeatureMask m2;
  m2.second_moment = true;
  const double moment = std::max(compute_features(nu1, m2).second_moment, compute_features(nu2, m2).second_moment);
  report.bound = std::exp(k * spec.horizon()) * (k * (1.0 + moment) + 1.0);

  const TimeMesh& mesh = u_path.mesh;
  ParticleState p1{mesh.t0, nu1};
  ParticleState p2{mesh.t0, nu2};
  for (std::size_t j = 1; j <= mesh.steps; ++j) {
    const double s = mesh.time(j);
    if (s > spec.horizon() + 1e-12) break;
    p1 = propagate(spec, p1, u_path, v_path, s, cfg);
    p2 = propagate(spec, p2, u_path, v_path, s, cfg);
    const double tr = wasserstein(2, p1.measure, nu1) / (s - mesh.t0);
    const double mr = wasserstein(2, p1.measure, p2.measure) / base;
    report.sample_times.push_back(s);
    report.time_ratios.push_back(tr);
    report.measure_ratios.push_back(mr);
    report.max_time_ratio = std::max(report.max_time_ratio, tr);
    report.max_measure_ratio = std::max(report.max_measure_ratio, mr);
  }
  return report;
}

}  // namespace mfgz
