#include "mfgz/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>

#include "mfgz/errors.hpp"
#include "mfgz/parallel.hpp"
#include "mfgz/textio.hpp"

namespace mfgz {

namespace {

using Leaf = std::function<double(const std::vector<double>&)>;

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < exp; ++k) {
    if (out > cap / std::max<std::size_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

struct Layer {
  SpatialGrid grid;
  std::vector<std::size_t> canon;          // canonical node indices
  std::vector<std::uint32_t> node_canon;   // node -> canonical id
  std::vector<double> images;              // canon x pairs x D
  std::vector<double> costs;               // canon x pairs
  std::vector<double> values;              // every node
};

class Engine {
 public:
  Engine(const GameSpec& spec, const TargetedEnsemble& ens, ValueKind kind, const DppConfig& cfg)
      : spec_(spec), ens_(ens), kind_(kind), cfg_(cfg) {
    if (cfg.steps < 1) throw InvalidArgument("DPP needs at least one time step");
    if (ens.x_measure.dim() != spec.dim()) throw InvalidArgument("ensemble dimension differs from the game");
    mesh_ = TimeMesh(0.0, spec.horizon(), cfg.steps);
    ug_ = control_grid(spec.u_box(), cfg.u_resolution);
    vg_ = control_grid(spec.v_box(), cfg.v_resolution);
    nu_ = ug_.size();
    nv_ = vg_.size();
    pairs_ = nu_ * nv_;
    n_ = spec.dim();
    particles_ = ens.x_measure.size();
    d_ = n_ * particles_;
    weights_.assign(ens.x_measure.weights().begin(), ens.x_measure.weights().end());
    atoms0_.assign(ens.x_measure.atoms().begin(), ens.x_measure.atoms().end());
    uniform_ = ens.x_measure.has_uniform_weights();
  }

  const TimeMesh& mesh() const { return mesh_; }
  std::size_t pairs() const { return pairs_; }
  std::size_t nu() const { return nu_; }
  std::size_t nv() const { return nv_; }
  const std::vector<double>& atoms0() const { return atoms0_; }

  double terminal(const std::vector<double>& atoms) const {
    return terminal_expectation(spec_, atoms, weights_, ens_.z_measure);
  }

  double transition(EnsembleStepper& st, std::size_t s, std::size_t p, std::vector<double>& atoms) const {
    return st.advance(atoms, mesh_.time(s), mesh_.time(s + 1), ug_.point(p / nv_), vg_.point(p % nv_),
                      cfg_.integrator.substeps);
  }

  // Game tree on steps [s, stop) with leaf values at stop.
  double tree(EnsembleStepper& st, std::size_t s, std::size_t stop, const std::vector<double>& atoms,
              const Leaf& leaf) const {
    if (s == stop) return leaf(atoms);
    std::vector<double> q(pairs_);
    for (std::size_t p = 0; p < pairs_; ++p) {
      std::vector<double> next = atoms;
      const double c = transition(st, s, p, next);
      q[p] = c + tree(st, s + 1, stop, next, leaf);
    }
    return extremize(kind_, q, nu_, nv_).value;
  }

  std::vector<double> exact_payoff(EnsembleStepper& st, std::size_t s, const std::vector<double>& atoms) const {
    const Leaf leaf = [this](const std::vector<double>& a) { return terminal(a); };
    std::vector<double> q(pairs_);
    for (std::size_t p = 0; p < pairs_; ++p) {
      std::vector<double> next = atoms;
      const double c = transition(st, s, p, next);
      q[p] = c + tree(st, s + 1, mesh_.steps, next, leaf);
    }
    return q;
  }

  // ----- grid mode -----

  void build_grid() {
    const std::size_t steps = mesh_.steps;
    layers_.clear();
    layers_.reserve(steps);
    EnsembleStepper st(spec_, weights_, cfg_.integrator);
    // step 0 at the exact initial configuration
    std::vector<double> img0(pairs_ * d_);
    for (std::size_t p = 0; p < pairs_; ++p) {
      std::vector<double> next = atoms0_;
      transition(st, 0, p, next);
      std::copy(next.begin(), next.end(), img0.begin() + static_cast<std::ptrdiff_t>(p * d_));
    }
    StateBox box = bounding_box(img0);
    for (std::size_t s = 1; s < steps; ++s) {
      tube_.push_back(box);
      layers_.push_back(make_layer(box));
      Layer& layer = layers_.back();
      propagate_layer(layer, s);
      evaluated_ += layer.canon.size();
      box = bounding_box(layer.images);
    }
    // backward; the last grid layer sees the exact terminal cost
    for (std::size_t s = steps - 1; s >= 1; --s) {
      Layer& layer = layers_[s - 1];
      std::vector<double> canon_values(layer.canon.size());
      parallel_for(layer.canon.size(), [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<double> q(pairs_);
        std::vector<double> img(d_);
        for (std::size_t k = b; k < e; ++k) {
          for (std::size_t p = 0; p < pairs_; ++p) {
            const double* src = layer.images.data() + (k * pairs_ + p) * d_;
            img.assign(src, src + d_);
            q[p] = layer.costs[k * pairs_ + p] + continuation(s + 1, img);
          }
          canon_values[k] = extremize(kind_, q, nu_, nv_).value;
        }
      });
      layer.values.resize(layer.grid.node_count());
      for (std::size_t node = 0; node < layer.values.size(); ++node)
        layer.values[node] = canon_values[layer.node_canon[node]];
      layer.images.clear();
      layer.images.shrink_to_fit();
      layer.costs.clear();
      layer.costs.shrink_to_fit();
    }
  }

  // Value to go from step s at an arbitrary configuration (s >= 1).
  double continuation(std::size_t s, const std::vector<double>& atoms) const {
    if (s == mesh_.steps) return terminal(atoms);
    const Layer& layer = layers_[s - 1];
    return layer.grid.interpolate(layer.values, atoms);
  }

  std::vector<double> grid_payoff(EnsembleStepper& st, std::size_t s, const std::vector<double>& atoms) const {
    std::vector<double> q(pairs_);
    for (std::size_t p = 0; p < pairs_; ++p) {
      std::vector<double> next = atoms;
      const double c = transition(st, s, p, next);
      q[p] = c + continuation(s + 1, next);
    }
    return q;
  }

  const std::vector<StateBox>& tube() const { return tube_; }
  std::size_t evaluated() const { return evaluated_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  StateBox bounding_box(const std::vector<double>& images) const {
    StateBox box;
    box.components.assign(n_, Interval{std::numeric_limits<double>::infinity(),
                                       -std::numeric_limits<double>::infinity()});
    for (std::size_t k = 0; k < images.size(); ++k) {
      Interval& iv = box.components[k % n_];
      iv.lo = std::min(iv.lo, images[k]);
      iv.hi = std::max(iv.hi, images[k]);
    }
    for (Interval& iv : box.components) {
      // images of points inside a cell stray from the node images by O(tau h^2);
      // a pad proportional to the whole box would compound over the steps
      const double cell = (iv.hi - iv.lo) / static_cast<double>(cfg_.grid_points - 1);
      const double pad = std::max(cfg_.margin * mesh_.step() * cell, 1e-3);
      iv.lo -= pad;
      iv.hi += pad;
    }
    return box;
  }

  Layer make_layer(const StateBox& box) const {
    if (cfg_.grid_points < 3) throw InvalidArgument("DPP grid needs at least 3 points per axis");
    std::vector<GridAxis> axes;
    for (std::size_t i = 0; i < particles_; ++i)
      for (std::size_t c = 0; c < n_; ++c)
        axes.push_back(GridAxis{box.components[c].lo, box.components[c].hi, cfg_.grid_points});
    if (checked_power(cfg_.grid_points, d_, cfg_.node_limit) > cfg_.node_limit)
      throw SizeLimitExceeded("DPP grid would exceed " + std::to_string(cfg_.node_limit) +
                              " nodes; lower dpp_grid_points or the particle count");
    Layer layer{SpatialGrid(std::move(axes)), {}, {}, {}, {}, {}};
    const std::size_t nodes = layer.grid.node_count();
    layer.node_canon.assign(nodes, 0);
    std::vector<std::size_t> idx(d_);
    std::vector<std::size_t> order(particles_);
    std::vector<std::size_t> sorted(d_);
    constexpr std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> id(nodes, unset);
    auto sorted_node = [&](std::size_t node) {
      layer.grid.multi_index(node, idx);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::lexicographical_compare(idx.begin() + a * n_, idx.begin() + (a + 1) * n_, idx.begin() + b * n_,
                                            idx.begin() + (b + 1) * n_);
      });
      for (std::size_t i = 0; i < particles_; ++i)
        for (std::size_t c = 0; c < n_; ++c) sorted[i * n_ + c] = idx[order[i] * n_ + c];
      return layer.grid.node_index(sorted);
    };
    for (std::size_t node = 0; node < nodes; ++node) {
      const std::size_t rep = uniform_ ? sorted_node(node) : node;
      if (rep == node) {
        id[node] = static_cast<std::uint32_t>(layer.canon.size());
        layer.canon.push_back(node);
      }
    }
    for (std::size_t node = 0; node < nodes; ++node)
      layer.node_canon[node] = uniform_ ? id[sorted_node(node)] : id[node];
    return layer;
  }

  void propagate_layer(Layer& layer, std::size_t s) const {
    const std::size_t count = layer.canon.size();
    layer.images.resize(count * pairs_ * d_);
    layer.costs.resize(count * pairs_);
    parallel_for(count, [&](std::size_t b, std::size_t e, std::size_t) {
      EnsembleStepper st(spec_, weights_, cfg_.integrator);
      std::vector<double> start(d_);
      std::vector<double> next;
      for (std::size_t k = b; k < e; ++k) {
        layer.grid.node_coords(layer.canon[k], start);
        for (std::size_t p = 0; p < pairs_; ++p) {
          next = start;
          layer.costs[k * pairs_ + p] = transition(st, s, p, next);
          std::copy(next.begin(), next.end(), layer.images.begin() + static_cast<std::ptrdiff_t>((k * pairs_ + p) * d_));
        }
      }
    });
  }

  const GameSpec& spec_;
  const TargetedEnsemble& ens_;
  ValueKind kind_;
  const DppConfig& cfg_;
  TimeMesh mesh_;
  ControlGrid ug_, vg_;
  std::size_t nu_ = 0, nv_ = 0, pairs_ = 0, n_ = 0, particles_ = 0, d_ = 0;
  std::vector<double> weights_;
  std::vector<double> atoms0_;
  bool uniform_ = true;
  std::vector<Layer> layers_;
  std::vector<StateBox> tube_;
  std::size_t evaluated_ = 0;
};

void check_exact_size(const Engine& e, std::size_t steps, const DppConfig& cfg) {
  if (checked_power(e.pairs(), steps, cfg.leaf_limit) > cfg.leaf_limit)
    throw SizeLimitExceeded("game tree has more than " + std::to_string(cfg.leaf_limit) + " leaves");
}

std::optional<std::size_t> mesh_split(const TimeMesh& mesh, double r) {
  const auto k = mesh.node_index(r, 1e-9 * (mesh.t1 - mesh.t0));
  if (!k || *k == 0 || *k == mesh.steps) return std::nullopt;
  return k;
}

}  // namespace

GameValueReport dpp_value(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                          const DppConfig& cfg) {
  Engine engine(spec, ensemble, kind, cfg);
  const TimeMesh& mesh = engine.mesh();
  GameValueReport report;
  report.kind = kind;
  report.mode = cfg.mode;
  report.steps = mesh.steps;
  report.tau = mesh.step();
  report.u_resolution = cfg.u_resolution;
  report.v_resolution = cfg.v_resolution;
  report.strategy.mesh = mesh;
  report.strategy.side = kind == ValueKind::lower ? StrategySide::player1_alpha : StrategySide::player2_beta;

  if (cfg.mode == DppMode::exact) {
    check_exact_size(engine, mesh.steps, cfg);
  } else {
    engine.build_grid();
    report.tube = engine.tube();
    report.evaluated_nodes = engine.evaluated();
  }
  EnsembleStepper st(spec, engine.weights(), cfg.integrator);
  std::vector<double> atoms = engine.atoms0();
  for (std::size_t s = 0; s < mesh.steps; ++s) {
    const std::vector<double> q =
        cfg.mode == DppMode::exact ? engine.exact_payoff(st, s, atoms) : engine.grid_payoff(st, s, atoms);
    const HamiltonianEval best = extremize(kind, q, engine.nu(), engine.nv());
    if (s == 0) {
      report.value = best.value;
      const double other = extremize(kind == ValueKind::lower ? ValueKind::upper : ValueKind::lower, q, engine.nu(),
                                     engine.nv())
                               .value;
      report.first_step_isaacs_gap = std::abs(other - best.value);
    }
    report.strategy.table.push_back(best_responses(kind, q, engine.nu(), engine.nv()));
    report.path_u.push_back(best.arg_u);
    report.path_v.push_back(best.arg_v);
    engine.transition(st, s, best.arg_u * engine.nv() + best.arg_v, atoms);
  }
  return report;
}

double brute_force_value(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                         const DppConfig& cfg) {
  Engine engine(spec, ensemble, kind, cfg);
  const std::size_t steps = engine.mesh().steps;
  const std::size_t pairs = engine.pairs();
  check_exact_size(engine, steps, cfg);
  const std::size_t leaves = checked_power(pairs, steps, cfg.leaf_limit);
  EnsembleStepper st(spec, engine.weights(), cfg.integrator);

  std::vector<double> values(leaves);
  std::vector<std::size_t> digits(steps);
  std::vector<double> costs(steps);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    std::size_t rest = leaf;
    for (std::size_t s = steps; s-- > 0;) {
      digits[s] = rest % pairs;
      rest /= pairs;
    }
    std::vector<double> atoms = engine.atoms0();
    for (std::size_t s = 0; s < steps; ++s) costs[s] = engine.transition(st, s, digits[s], atoms);
    double j = engine.terminal(atoms);
    for (std::size_t s = steps; s-- > 0;) j = costs[s] + j;
    values[leaf] = j;
  }
  for (std::size_t level = steps; level-- > 0;) {
    std::vector<double> up(values.size() / pairs);
    for (std::size_t k = 0; k < up.size(); ++k)
      up[k] = extremize(kind, std::span<const double>(values).subspan(k * pairs, pairs), engine.nu(), engine.nv())
                  .value;
    values = std::move(up);
  }
  return values.front();
}

double dpp_residual(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind, const DppConfig& cfg,
                    double r) {
  Engine engine(spec, ensemble, kind, cfg);
  const TimeMesh& mesh = engine.mesh();
  const auto split = mesh_split(mesh, r);
  if (!split) throw InvalidArgument("split time must be an interior node of the time mesh");
  const std::size_t k = *split;
  EnsembleStepper st(spec, engine.weights(), cfg.integrator);

  if (cfg.mode == DppMode::exact) {
    check_exact_size(engine, mesh.steps, cfg);
    const Leaf terminal = [&](const std::vector<double>& a) { return engine.terminal(a); };
    const double direct = engine.tree(st, 0, mesh.steps, engine.atoms0(), terminal);
    // value at r computed as a separate problem on the remaining steps, then used as terminal data
    const Leaf at_r = [&](const std::vector<double>& a) {
      EnsembleStepper inner(spec, engine.weights(), cfg.integrator);
      return engine.tree(inner, k, mesh.steps, a, terminal);
    };
    const double through = engine.tree(st, 0, k, engine.atoms0(), at_r);
    return std::abs(direct - through);
  }

  check_exact_size(engine, k, cfg);
  engine.build_grid();
  const double direct = extremize(kind, engine.grid_payoff(st, 0, engine.atoms0()), engine.nu(), engine.nv()).value;
  const Leaf at_r = [&](const std::vector<double>& a) { return engine.continuation(k, a); };
  const double through = engine.tree(st, 0, k, engine.atoms0(), at_r);
  return std::abs(direct - through);
}

CrossValidation cross_validate_vs_hji(const GameSpec& spec, const TargetedEnsemble& ensemble, ValueKind kind,
                                      const DppConfig& cfg, const SpatialGrid& hji_grid,
                                      const SchemeConfig& scheme) {
  if (!ensemble.x_measure.has_uniform_weights())
    throw InvalidArgument("cross validation needs uniform atom weights");
  if (hji_grid.axis_count() != ensemble.x_measure.size() * spec.dim())
    throw InvalidArgument("solver grid axes do not match the ensemble's particle count");
  CrossValidation out;
  out.dpp = dpp_value(spec, ensemble, kind, cfg).value;
  const HjiSolver solver(spec, hji_grid, ensemble.z_measure, scheme);
  const HjiSolution sol = solver.solve(kind, 1);
  out.hji = field_value_at(sol.field, ensemble.x_measure.atoms());
  out.discrepancy = std::abs(out.dpp - out.hji);
  out.dpp_steps = cfg.steps;
  out.dpp_points = cfg.grid_points;
  out.hji_steps = solver.steps();
  out.hji_points = hji_grid.axis(0).points;
  return out;
}

void write_report(std::ostream& out, const GameValueReport& r) {
  out << "kind = " << (r.kind == ValueKind::lower ? "lower" : "upper") << '\n';
  out << "mode = " << (r.mode == DppMode::exact ? "exact" : "grid") << '\n';
  out << "value = " << fmt(r.value) << '\n';
  out << "steps = " << r.steps << '\n';
  out << "tau = " << fmt(r.tau) << '\n';
  out << "u_resolution = " << r.u_resolution << '\n';
  out << "v_resolution = " << r.v_resolution << '\n';
  out << "first_step_isaacs_gap = " << fmt(r.first_step_isaacs_gap) << '\n';
  if (r.residual) out << "dpp_residual = " << fmt(*r.residual) << '\n';
  if (r.mode == DppMode::grid) out << "evaluated_nodes = " << r.evaluated_nodes << '\n';
  out << "path_u =";
  for (std::size_t i : r.path_u) out << ' ' << i;
  out << "\npath_v =";
  for (std::size_t i : r.path_v) out << ' ' << i;
  out << '\n';
  for (std::size_t s = 0; s < r.tube.size(); ++s) {
    out << "box_step_" << s + 1 << " =";
    for (const Interval& iv : r.tube[s].components) out << ' ' << fmt(iv.lo) << ' ' << fmt(iv.hi);
    out << '\n';
  }
}

void write_strategy_csv(std::ostream& out, const GameValueReport& r) {
  const bool lower = r.kind == ValueKind::lower;
  out << "step,t," << (lower ? "v_index,u_index" : "u_index,v_index") << ",on_path\n";
  for (std::size_t s = 0; s < r.strategy.table.size(); ++s) {
    const std::size_t realized = lower ? r.path_v[s] : r.path_u[s];
    for (std::size_t j = 0; j < r.strategy.table[s].size(); ++j)
      out << s << ',' << fmt(r.strategy.mesh.time(s)) << ',' << j << ',' << r.strategy.table[s][j] << ','
          << (j == realized ? 1 : 0) << '\n';
  }
}

}  // namespace mfgz
