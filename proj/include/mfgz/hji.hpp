#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "mfgz/game.hpp"
#include "mfgz/grid.hpp"
#include "mfgz/hamiltonian.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

struct SchemeConfig {
  std::size_t steps = 0;  // 0 picks the smallest count that meets the CFL bound
  double cfl = 0.9;
  std::size_t control_resolution = 5;
};

/// Value on the particle lift: grid axis i*dim + c is coordinate c of particle i,
/// particles carry weight 1/N each.
struct ValueField {
  SpatialGrid grid;
  double t = 0.0;
  std::vector<double> values;
  ValueKind kind = ValueKind::lower;
  EmpiricalMeasure z_measure;
  std::size_t particles = 1;
};

struct HjiSnapshot {
  double t = 0.0;
  std::vector<double> values;
};

struct HjiSolution {
  ValueField field;  // at t = 0
  std::vector<HjiSnapshot> snapshots;  // decreasing t, first is the terminal field
  std::size_t steps = 0;
  double dt = 0.0;
  double cfl_number = 0.0;
  double max_abs_terminal = 0.0;
  double max_abs_running_cost = 0.0;
  /// Largest excess of |value| over max|m| + (T-t) max|l| seen at any step.
  double max_principle_excess = 0.0;
  bool max_principle_ok() const { return max_principle_excess <= 1e-9; }
};

/// Lax-Friedrichs solver for the lifted HJI equation restricted to N-atom
/// uniform laws. Dissipation per axis is sup |f_axis| over grid and controls.
/// Boundary nodes use one-sided differences without dissipation.
class HjiSolver {
 public:
  /// Grid axis count must be a multiple of spec.dim() and at most 3.
  HjiSolver(const GameSpec& spec, SpatialGrid grid, EmpiricalMeasure z_measure, SchemeConfig cfg = {});

  std::size_t particles() const noexcept { return particles_; }
  const SpatialGrid& grid() const noexcept { return grid_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  const std::vector<double>& sigma() const noexcept { return sigma_; }
  /// dt * sum_a sigma_a / dx_a
  double cfl_number() const noexcept { return cfl_number_; }
  double max_abs_running_cost() const noexcept { return max_abs_l_; }

  ValueField terminal_field(ValueKind kind) const;
  ValueField terminal_field(ValueKind kind, const Expression& terminal_cost) const;

  /// One explicit step from field.t to field.t - dt.
  ValueField step_backward(const ValueField& field) const;

  /// S steps from the terminal field. Snapshots are kept at `snapshot_count`
  /// evenly spaced step indices (always including both ends when >= 2).
  HjiSolution solve(ValueKind kind, std::size_t snapshot_count = 2) const;
  HjiSolution solve(ValueKind kind, const Expression& terminal_cost, std::size_t snapshot_count = 2) const;

  /// Hamiltonian value at one node for a given raw gradient (dV/dx per axis).
  double node_hamiltonian(ValueKind kind, double t, std::size_t node, std::span<const double> gradient) const;

 private:
  void drift_and_cost(double t, std::size_t node, std::vector<double>& f, std::vector<double>& l) const;
  HjiSolution run(ValueField field, std::size_t snapshot_count) const;

  const GameSpec& spec_;
  SpatialGrid grid_;
  EmpiricalMeasure z_measure_;
  SchemeConfig cfg_;
  std::size_t particles_ = 1;
  ControlGrid u_grid_;
  ControlGrid v_grid_;
  std::vector<double> sigma_;
  std::size_t steps_ = 1;
  double dt_ = 0.0;
  double cfl_number_ = 0.0;
  double max_abs_l_ = 0.0;
  bool cached_ = false;
  // time-independent games: per node, per control pair, D drift values then N costs
  std::vector<double> cache_;
};

/// Terminal data E[m] on every node of the lift.
ValueField terminal_field(const GameSpec& spec, const SpatialGrid& grid, const EmpiricalMeasure& z_measure,
                          ValueKind kind = ValueKind::lower);

/// Value of a field at a particle configuration (atoms packed row-major).
double field_value_at(const ValueField& field, std::span<const double> atoms);

/// Solves with terminal data m_lo and m_hi (m_lo <= m_hi on every node, else
/// InvalidArgument) and returns the min over nodes and step times of hi - lo.
double comparison_check(const GameSpec& spec, const SpatialGrid& grid, const EmpiricalMeasure& z_measure,
                        ValueKind kind, const SchemeConfig& cfg, const Expression& m_lo, const Expression& m_hi);

/// CSV rows t,x1..xD,value for every snapshot.
void write_snapshots_csv(std::ostream& out, const SpatialGrid& grid, std::span<const HjiSnapshot> snapshots);

/// gnuplot nonuniform matrix (one axis only): first row count then x nodes,
/// then one row per snapshot: t followed by the values.
void write_surface_matrix(std::ostream& out, const SpatialGrid& grid, std::span<const HjiSnapshot> snapshots);

}  // namespace mfgz
