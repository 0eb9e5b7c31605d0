#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfgz/game.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

struct ParticleState {
  double time = 0.0;
  EmpiricalMeasure measure;
};

enum class Scheme { rk4, euler };

struct IntegratorConfig {
  Scheme scheme = Scheme::rk4;
  std::size_t substeps = 8;  // per control step
};

/// Low-level particle integrator working on packed atom arrays. Every stage
/// recomputes the features of the ensemble's current empirical law before
/// evaluating any atom's drift, so all atoms see the same law (synchronous
/// coupling). The running cost is integrated with the same stages, which for
/// rk4 is Simpson's rule on each substep.
///
/// Holds scratch buffers, so use one instance per thread.
class EnsembleStepper {
 public:
  EnsembleStepper(const GameSpec& spec, std::span<const double> weights, IntegratorConfig cfg);

  /// Advance `atoms` from t0 to t1 under constant controls using `substeps`
  /// uniform substeps. Returns the weighted running cost over the interval.
  double advance(std::vector<double>& atoms, double t0, double t1, std::span<const double> u,
                 std::span<const double> v, std::size_t substeps);

  /// One full control step of length tau with the configured substep count.
  double step(std::vector<double>& atoms, double t0, double tau, std::span<const double> u,
              std::span<const double> v) {
    return advance(atoms, t0, t0 + tau, u, v, cfg_.substeps);
  }

  const IntegratorConfig& config() const noexcept { return cfg_; }

 private:
  double rates(double t, std::span<const double> atoms, std::span<const double> u,
               std::span<const double> v, std::vector<double>& out);

  const GameSpec& spec_;
  std::vector<double> weights_;
  IntegratorConfig cfg_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Advance the ensemble from state.time to `until` along the control paths.
ParticleState propagate(const GameSpec& spec, const ParticleState& state, const ControlPath& u_path,
                        const ControlPath& v_path, double until, const IntegratorConfig& cfg = {});

struct CostedState {
  ParticleState state;
  double cost = 0.0;
};

CostedState running_cost_accumulate(const GameSpec& spec, const ParticleState& state,
                                    const ControlPath& u_path, const ControlPath& v_path,
                                    double until, const IntegratorConfig& cfg = {});

/// Objective J(t, nu; u, v): accumulated running cost plus expected terminal cost.
double evaluate_objective(const GameSpec& spec, const TargetedEnsemble& ensemble, double t0,
                          const ControlPath& u_path, const ControlPath& v_path,
                          const IntegratorConfig& cfg = {});

/// max over atoms of |X(t->s) - X(r->s) o X(t->r)|, with state at time t.
double check_flow_property(const GameSpec& spec, const ParticleState& state, const ControlPath& u_path,
                           const ControlPath& v_path, double r, double s,
                           const IntegratorConfig& cfg = {});

/// Empirical constants for the continuity estimates of the flow.
struct EstimateReport {
  std::vector<double> sample_times;
  std::vector<double> time_ratios;     // W2(P_s, nu1) / (s - t)
  std::vector<double> measure_ratios;  // W2(P_s from nu1, P_s from nu2) / W2(nu1, nu2)
  double max_time_ratio = 0.0;
  double max_measure_ratio = 0.0;
  /// e^{K T} (K (1 + max second moment) + 1); an explicit sufficient Gronwall constant.
  double bound = 0.0;

  bool time_ratio_ok() const { return max_time_ratio <= bound; }
  bool measure_ratio_ok() const { return max_measure_ratio <= bound; }
};

/// Samples every mesh node of u_path after the start. Requires spec.lipschitz_k().
EstimateReport check_estimates(const GameSpec& spec, const EmpiricalMeasure& nu1,
                               const EmpiricalMeasure& nu2, const ControlPath& u_path,
                               const ControlPath& v_path, const IntegratorConfig& cfg = {});

}  // namespace mfgz
