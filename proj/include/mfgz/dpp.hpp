#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mfgz/dynamics.hpp"
#include "mfgz/game.hpp"
#include "mfgz/grid.hpp"
#include "mfgz/hamiltonian.hpp"
#include "mfgz/hji.hpp"

namespace mfgz {

enum class DppMode {
  exact,  // full game tree on exact particle configurations
  grid    // per-step interpolation grids around the reachable configurations
};

struct DppConfig {
  std::size_t steps = 10;
  std::size_t u_resolution = 5;
  std::size_t v_resolution = 5;
  DppMode mode = DppMode::grid;
  std::size_t grid_points = 15;  // per axis
  double margin = 1.0;           // box padding, in units of tau * cell width
  IntegratorConfig integrator{Scheme::rk4, 4};
  std::size_t leaf_limit = 1'000'000;
  std::size_t node_limit = 5'000'000;
};

struct StateBox {
  std::vector<Interval> components;  // one interval per state component, shared by all particles
};

struct GameValueReport {
  ValueKind kind = ValueKind::lower;
  DppMode mode = DppMode::grid;
  double value = 0.0;
  std::size_t steps = 0;
  double tau = 0.0;
  std::size_t u_resolution = 0;
  std::size_t v_resolution = 0;
  /// Response tables along the realized path (lower: u index per v index).
  DiscreteStrategy strategy;
  std::vector<std::size_t> path_u;
  std::vector<std::size_t> path_v;
  /// |upper - lower| extremum of the first-step payoff matrix.
  double first_step_isaacs_gap = 0.0;
  /// grid mode: boxes of steps 1..S and node counts actually evaluated
  std::vector<StateBox> tube;
  std::size_t evaluated_nodes = 0;
  std::optional<double> residual;
};

/// Lower (sup_v inf_u per step, the minimizer sees the current step's v) or
/// upper (mirror) value at t = 0 by backward recursion.
GameValueReport dpp_value(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                          const DppConfig& cfg);

/// Enumerates every leaf of the (R_u R_v)^S game tree, evaluates J along each
/// control sequence from scratch, then reduces level by level. Capped at
/// cfg.leaf_limit leaves (SizeLimitExceeded).
double brute_force_value(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                         const DppConfig& cfg);

/// |direct value - value obtained by recursing on [0, r] with the value at r as
/// terminal data|. Exact mode recurses exactly through r; grid mode runs the
/// exact tree on [0, r] against the grid field at r (leaf cap applies).
double dpp_residual(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind, const DppConfig& cfg,
                    double r);

struct CrossValidation {
  double dpp = 0.0;
  double hji = 0.0;
  double discrepancy = 0.0;
  std::size_t dpp_steps = 0;
  std::size_t hji_steps = 0;
  std::size_t hji_points = 0;
  std::size_t dpp_points = 0;
};

/// Compares dpp_value against the finite-difference solution evaluated at the
/// ensemble's atoms (uniform weights, atom count = solver particle count).
CrossValidation cross_validate_vs_hji(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                                      const DppConfig& cfg, const SpatialGrid& hji_grid,
                                      const SchemeConfig& scheme);

void write_report(std::ostream& out, const GameValueReport& report);
void write_strategy_csv(std::ostream& out, const GameValueReport& report);

}  // namespace mfgz
