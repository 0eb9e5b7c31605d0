#include "mfgz/game.hpp"

#include <cmath>
#include <string>

#include "mfgz/errors.hpp"

namespace mfgz {

bool ControlBox::contains(std::span<const double> point, double tol) const {
  if (point.size() != axes.size()) return false;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (point[k] < axes[k].lo - tol || point[k] > axes[k].hi + tol) return false;
  }
  return true;
}

ControlGrid control_grid(const ControlBox& box, std::size_t resolution) {
  if (box.dim() == 0) throw InvalidArgument("control_grid: empty box");
  std::vector<std::vector<double>> axis_points;
  for (const Interval& iv : box.axes) {
    std::vector<double> pts;
    if (iv.lo == iv.hi) {
      pts.push_back(iv.lo);
    } else {
      if (resolution < 2) throw InvalidArgument("control_grid: resolution must be >= 2 on non-singleton axes");
      for (std::size_t k = 0; k < resolution; ++k) {
        if (k + 1 == resolution) {
          pts.push_back(iv.hi);
        } else {
          pts.push_back(iv.lo + (iv.hi - iv.lo) * static_cast<double>(k) / static_cast<double>(resolution - 1));
        }
      }
    }
    axis_points.push_back(std::move(pts));
  }
  ControlGrid grid;
  grid.dim = box.dim();
  std::size_t total = 1;
  for (const auto& pts : axis_points) total *= pts.size();
  grid.points.reserve(total * grid.dim);
  std::vector<std::size_t> idx(grid.dim, 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t k = 0; k < grid.dim; ++k) grid.points.push_back(axis_points[k][idx[k]]);
    for (std::size_t k = grid.dim; k-- > 0;) {
      if (++idx[k] < axis_points[k].size()) break;
      idx[k] = 0;
    }
  }
  return grid;
}

namespace {

void validate_box(const ControlBox& box, const char* name) {
  if (box.dim() == 0) throw InvalidArgument(std::string("control box ") + name + " is empty");
  for (const Interval& iv : box.axes) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
      throw InvalidArgument(std::string("control box ") + name + " must be bounded with lo <= hi");
  }
}

void validate_dynamic(const Expression& e, const char* what, std::size_t dim, const ControlBox& u,
                      const ControlBox& v) {
  const ExpressionInfo& info = e.info();
  const std::string w(what);
  if (info.x_count > dim) throw InvalidArgument(w + " references x" + std::to_string(info.x_count) + " beyond dim");
  if (info.u_count > u.dim()) throw InvalidArgument(w + " references an undeclared u component");
  if (info.v_count > v.dim()) throw InvalidArgument(w + " references an undeclared v component");
  if (info.z_count > 0) throw InvalidArgument(w + " may not reference the target z");
  if (info.mean_components > dim) throw InvalidArgument(w + " references feature(mean) beyond dim");
  if (info.features.mean_sin && dim != 1) throw InvalidArgument(w + ": feature(mean_sin) requires dim == 1");
}

}  // namespace

GameSpec::GameSpec(double horizon, std::size_t dim, ControlBox u_box, ControlBox v_box,
                   std::vector<Expression> drift, Expression running_cost, Expression terminal_cost,
                   std::optional<double> lipschitz_k)
    : horizon_(horizon),
      dim_(dim),
      u_box_(std::move(u_box)),
      v_box_(std::move(v_box)),
      drift_(std::move(drift)),
      running_cost_(std::move(running_cost)),
      terminal_cost_(std::move(terminal_cost)),
      lipschitz_k_(lipschitz_k) {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw InvalidArgument("horizon must be positive");
  if (dim_ == 0) throw InvalidArgument("state dimension must be positive");
  validate_box(u_box_, "U");
  validate_box(v_box_, "V");
  if (drift_.size() != dim_)
    throw InvalidArgument("drift needs " + std::to_string(dim_) + " components, got " + std::to_string(drift_.size()));
  for (const Expression& e : drift_) {
    validate_dynamic(e, "f", dim_, u_box_, v_box_);
    dynamic_features_ |= e.info().features;
    time_dependent_ |= e.info().uses_time;
  }
  validate_dynamic(running_cost_, "l", dim_, u_box_, v_box_);
  dynamic_features_ |= running_cost_.info().features;
  time_dependent_ |= running_cost_.info().uses_time;

  const ExpressionInfo& m = terminal_cost_.info();
  if (m.uses_time || m.u_count > 0 || m.v_count > 0)
    throw InvalidArgument("m may only reference x, z and features of the terminal law");
  if (m.x_count > dim_ || m.z_count > dim_) throw InvalidArgument("m references components beyond dim");
  if (m.mean_components > dim_) throw InvalidArgument("m references feature(mean) beyond dim");
  if (m.features.mean_sin && dim_ != 1) throw InvalidArgument("m: feature(mean_sin) requires dim == 1");
  terminal_features_ = m.features;

  if (lipschitz_k_ && !(*lipschitz_k_ > 0.0)) throw InvalidArgument("lipschitz_K must be positive");
}

GameSpec GameSpec::with_terminal_cost(Expression terminal_cost) const {
  return GameSpec(horizon_, dim_, u_box_, v_box_, drift_, running_cost_, std::move(terminal_cost), lipschitz_k_);
}

void eval_drift(const GameSpec& spec, double t, std::span<const double> x,
                const MeasureFeatures& features, std::span<const double> u,
                std::span<const double> v, std::span<double> out) {
  EvalContext ctx;
  ctx.t = t;
  ctx.x = x;
  ctx.u = u;
  ctx.v = v;
  ctx.features = &features;
  const auto& drift = spec.drift();
  for (std::size_t k = 0; k < drift.size(); ++k) out[k] = drift[k].evaluate(ctx);
}

double eval_running_cost(const GameSpec& spec, double t, std::span<const double> x,
                         const MeasureFeatures& features, std::span<const double> u,
                         std::span<const double> v) {
  EvalContext ctx;
  ctx.t = t;
  ctx.x = x;
  ctx.u = u;
  ctx.v = v;
  ctx.features = &features;
  return spec.running_cost().evaluate(ctx);
}

namespace {

void check_controls(const GameSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (!spec.u_box().contains(u)) throw InvalidArgument("control u outside U");
  if (!spec.v_box().contains(v)) throw InvalidArgument("control v outside V");
}

}  // namespace

std::vector<double> eval_f(const GameSpec& spec, double t, std::span<const double> x,
                           const EmpiricalMeasure& nu_x, std::span<const double> u,
                           std::span<const double> v) {
  if (x.size() != spec.dim() || nu_x.dim() != spec.dim()) throw InvalidArgument("eval_f: dimension mismatch");
  check_controls(spec, u, v);
  const MeasureFeatures features = compute_features(nu_x, spec.dynamic_features());
  std::vector<double> out(spec.dim());
  eval_drift(spec, t, x, features, u, v, out);
  return out;
}

double eval_l(const GameSpec& spec, double t, std::span<const double> x, const EmpiricalMeasure& nu_x,
              std::span<const double> u, std::span<const double> v) {
  if (x.size() != spec.dim() || nu_x.dim() != spec.dim()) throw InvalidArgument("eval_l: dimension mismatch");
  check_controls(spec, u, v);
  const MeasureFeatures features = compute_features(nu_x, spec.dynamic_features());
  return eval_running_cost(spec, t, x, features, u, v);
}

TargetedEnsemble::TargetedEnsemble(EmpiricalMeasure x, EmpiricalMeasure z)
    : x_measure(std::move(x)), z_measure(std::move(z)) {
  if (x_measure.dim() != z_measure.dim())
    throw InvalidArgument("TargetedEnsemble: x and z laws must share the dimension");
}

double terminal_expectation(const GameSpec& spec, std::span<const double> x_atoms,
                            std::span<const double> x_weights, const EmpiricalMeasure& z_measure) {
  const std::size_t n = spec.dim();
  if (x_atoms.size() != x_weights.size() * n) throw InvalidArgument("terminal cost: atom/weight length mismatch");
  if (z_measure.dim() != n) throw InvalidArgument("terminal cost: target dimension mismatch");
  const MeasureFeatures features = compute_features(n, x_atoms, x_weights, spec.terminal_features());
  EvalContext ctx;
  ctx.features = &features;
  const bool uses_z = spec.terminal_cost().info().z_count > 0;
  double total = 0.0;
  for (std::size_t i = 0; i < x_weights.size(); ++i) {
    ctx.x = x_atoms.subspan(i * n, n);
    double inner = 0.0;
    if (uses_z) {
      for (std::size_t j = 0; j < z_measure.size(); ++j) {
        ctx.z = z_measure.atom(j);
        inner += z_measure.weight(j) * spec.terminal_cost().evaluate(ctx);
      }
    } else {
      ctx.z = z_measure.atom(0);
      inner = spec.terminal_cost().evaluate(ctx);
    }
    total += x_weights[i] * inner;
  }
  return total;
}

double eval_terminal_cost(const GameSpec& spec, const TargetedEnsemble& ensemble,
                          std::span<const double> terminal_atoms) {
  if (terminal_atoms.size() != ensemble.x_measure.atoms().size())
    throw InvalidArgument("eval_terminal_cost: terminal atoms do not match the ensemble size");
  return terminal_expectation(spec, terminal_atoms, ensemble.x_measure.weights(), ensemble.z_measure);
}

TimeMesh::TimeMesh(double start, double end, std::size_t count) : t0(start), t1(end), steps(count) {
  if (!(start < end)) throw InvalidArgument("TimeMesh: need t0 < t1");
  if (count < 1) throw InvalidArgument("TimeMesh: need at least one step");
}

std::optional<std::size_t> TimeMesh::node_index(double t, double tol) const {
  const double pos = (t - t0) / step();
  const double r = std::round(pos);
  if (r < 0 || r > static_cast<double>(steps) || std::abs(pos - r) > tol * static_cast<double>(steps) + tol)
    return std::nullopt;
  return static_cast<std::size_t>(r);
}

ControlPath ControlPath::constant(const TimeMesh& mesh, std::span<const double> point) {
  ControlPath path;
  path.mesh = mesh;
  path.dim = point.size();
  for (std::size_t s = 0; s < mesh.steps; ++s) path.values.insert(path.values.end(), point.begin(), point.end());
  return path;
}

bool ControlPath::inside(const ControlBox& box) const {
  if (dim != box.dim()) return false;
  for (std::size_t s = 0; s < mesh.steps; ++s)
    if (!box.contains(at_step(s))) return false;
  return true;
}

std::vector<std::size_t> DiscreteStrategy::respond(std::span<const std::size_t> opponent) const {
  if (opponent.size() > table.size()) throw InvalidArgument("strategy: opponent sequence longer than the table");
  std::vector<std::size_t> own;
  own.reserve(opponent.size());
  for (std::size_t s = 0; s < opponent.size(); ++s) {
    if (opponent[s] >= table[s].size()) throw InvalidArgument("strategy: opponent index out of range");
    own.push_back(table[s][opponent[s]]);
  }
  return own;
}

}  // namespace mfgz
