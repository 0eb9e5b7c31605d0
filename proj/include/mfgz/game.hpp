#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfgz/expression.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Compact control set as a product of closed intervals.
struct ControlBox {
  std::vector<Interval> axes;

  std::size_t dim() const noexcept { return axes.size(); }
  bool contains(std::span<const double> point, double tol = 1e-12) const;
};

/// Tensor grid over a control box, points packed row-major (dim values each),
/// lexicographic order with the last axis varying fastest.
struct ControlGrid {
  std::size_t dim = 0;
  std::vector<double> points;

  std::size_t size() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points).subspan(i * dim, dim);
  }
};

/// R points per axis including both endpoints. Singleton axes (lo == hi)
/// contribute a single point; otherwise R must be at least 2.
ControlGrid control_grid(const ControlBox& box, std::size_t resolution);

/// Game data: drift f (one expression per state component), running cost l,
/// terminal cost m, control boxes and horizon. Validated on construction and
/// immutable afterwards.
class GameSpec {
 public:
  GameSpec(double horizon, std::size_t dim, ControlBox u_box, ControlBox v_box,
           std::vector<Expression> drift, Expression running_cost, Expression terminal_cost,
           std::optional<double> lipschitz_k = std::nullopt);

  double horizon() const noexcept { return horizon_; }
  std::size_t dim() const noexcept { return dim_; }
  const ControlBox& u_box() const noexcept { return u_box_; }
  const ControlBox& v_box() const noexcept { return v_box_; }
  const std::vector<Expression>& drift() const noexcept { return drift_; }
  const Expression& running_cost() const noexcept { return running_cost_; }
  const Expression& terminal_cost() const noexcept { return terminal_cost_; }
  std::optional<double> lipschitz_k() const noexcept { return lipschitz_k_; }

  /// Features of the current law that f or l read.
  const FeatureMask& dynamic_features() const noexcept { return dynamic_features_; }
  /// Features of the terminal law that m reads.
  const FeatureMask& terminal_features() const noexcept { return terminal_features_; }
  /// True when f or l reference t (outside the time-independent setting).
  bool time_dependent() const noexcept { return time_dependent_; }

  /// Copy with a different terminal cost (used by comparison runs).
  GameSpec with_terminal_cost(Expression terminal_cost) const;

 private:
  double horizon_;
  std::size_t dim_;
  ControlBox u_box_;
  ControlBox v_box_;
  std::vector<Expression> drift_;
  Expression running_cost_;
  Expression terminal_cost_;
  std::optional<double> lipschitz_k_;
  FeatureMask dynamic_features_;
  FeatureMask terminal_features_;
  bool time_dependent_ = false;
};

/// Drift at one point given precomputed features of the current law.
void eval_drift(const GameSpec& spec, double t, std::span<const double> x,
                const MeasureFeatures& features, std::span<const double> u,
                std::span<const double> v, std::span<double> out);

double eval_running_cost(const GameSpec& spec, double t, std::span<const double> x,
                         const MeasureFeatures& features, std::span<const double> u,
                         std::span<const double> v);

/// f(t, x, nu_x, u, v). Controls must lie in their boxes.
std::vector<double> eval_f(const GameSpec& spec, double t, std::span<const double> x,
                           const EmpiricalMeasure& nu_x, std::span<const double> u,
                           std::span<const double> v);

double eval_l(const GameSpec& spec, double t, std::span<const double> x,
              const EmpiricalMeasure& nu_x, std::span<const double> u, std::span<const double> v);

/// Initial law of the state and law of the target, assumed independent.
struct TargetedEnsemble {
  EmpiricalMeasure x_measure;
  EmpiricalMeasure z_measure;

  TargetedEnsemble(EmpiricalMeasure x, EmpiricalMeasure z);
};

/// sum_i w_i sum_j w'_j m(x_i, z_j) where x_i are the terminal particle
/// positions (atom i keeps the weight of atom i of x_measure).
double eval_terminal_cost(const GameSpec& spec, const TargetedEnsemble& ensemble,
                          std::span<const double> terminal_atoms);

/// Same expectation with explicit weights; used on particle-grid nodes.
double terminal_expectation(const GameSpec& spec, std::span<const double> x_atoms,
                            std::span<const double> x_weights, const EmpiricalMeasure& z_measure);

/// Uniform time mesh on [t0, t1] with `steps` intervals.
struct TimeMesh {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t steps = 1;

  TimeMesh() = default;
  TimeMesh(double start, double end, std::size_t count);

  double step() const noexcept { return (t1 - t0) / static_cast<double>(steps); }
  double time(std::size_t s) const noexcept {
    return s == steps ? t1 : t0 + static_cast<double>(s) * step();
  }
  /// Index of the mesh node equal to t (within tolerance), if any.
  std::optional<std::size_t> node_index(double t, double tol = 1e-12) const;
};

/// Piecewise-constant control: values[s] is applied on [time(s), time(s+1)).
struct ControlPath {
  TimeMesh mesh;
  std::size_t dim = 0;
  std::vector<double> values;  // steps x dim

  static ControlPath constant(const TimeMesh& mesh, std::span<const double> point);
  std::span<const double> at_step(std::size_t s) const {
    return std::span<const double>(values).subspan(s * dim, dim);
  }
  bool inside(const ControlBox& box) const;
};

enum class StrategySide { player1_alpha, player2_beta };

/// Step-causal strategy: at step s the own control index is table[s][opponent
/// index at step s]. History dependence enters only through how the table was
/// built (backward recursion along the realized path).
struct DiscreteStrategy {
  TimeMesh mesh;
  StrategySide side = StrategySide::player1_alpha;
  std::vector<std::vector<std::size_t>> table;

  /// Own control indices produced in response to an opponent index sequence.
  std::vector<std::size_t> respond(std::span<const std::size_t> opponent) const;
};

}  // namespace mfgz
