#include "mfgz/hji.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfgz/errors.hpp"
#include "mfgz/parallel.hpp"
#include "mfgz/textio.hpp"

namespace mfgz {

namespace {

constexpr std::size_t kMaxAxes = 3;
constexpr std::size_t kCacheLimit = 50'000'000;  // doubles
constexpr std::size_t kTimeSamples = 65;

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

HjiSolver::HjiSolver(const GameSpec& spec, SpatialGrid grid, EmpiricalMeasure z_measure, SchemeConfig cfg)
    : spec_(spec), grid_(std::move(grid)), z_measure_(std::move(z_measure)), cfg_(cfg) {
  const std::size_t n = spec_.dim();
  const std::size_t d = grid_.axis_count();
  if (d % n != 0) throw InvalidArgument("grid axis count must be a multiple of the state dimension");
  if (d > kMaxAxes) throw InvalidArgument("the finite-difference solver supports at most 3 grid axes");
  if (z_measure_.dim() != n) throw InvalidArgument("z law dimension differs from the state dimension");
  if (!(cfg_.cfl > 0.0 && cfg_.cfl <= 1.0)) throw InvalidArgument("CFL safety factor must lie in (0, 1]");
  particles_ = d / n;
  u_grid_ = control_grid(spec_.u_box(), cfg_.control_resolution);
  v_grid_ = control_grid(spec_.v_box(), cfg_.control_resolution);

  const std::size_t pairs = u_grid_.size() * v_grid_.size();
  const std::size_t per_node = pairs * (d + particles_);
  cached_ = !spec_.time_dependent() && grid_.node_count() * per_node <= kCacheLimit;
  if (cached_) cache_.resize(grid_.node_count() * per_node);

  sigma_.assign(d, 0.0);
  std::vector<double> times{0.0};
  if (spec_.time_dependent()) {
    times.clear();
    for (std::size_t j = 0; j < kTimeSamples; ++j)
      times.push_back(spec_.horizon() * static_cast<double>(j) / static_cast<double>(kTimeSamples - 1));
  }
  std::vector<double> f;
  std::vector<double> l;
  for (double t : times) {
    for (std::size_t node = 0; node < grid_.node_count(); ++node) {
      drift_and_cost(t, node, f, l);
      for (std::size_t p = 0; p < pairs; ++p)
        for (std::size_t a = 0; a < d; ++a) sigma_[a] = std::max(sigma_[a], std::abs(f[p * d + a]));
      for (double c : l) max_abs_l_ = std::max(max_abs_l_, std::abs(c));
      if (cached_) {
        double* dst = cache_.data() + node * per_node;
        std::copy(f.begin(), f.end(), dst);
        std::copy(l.begin(), l.end(), dst + pairs * d);
      }
    }
  }

  double rate = 0.0;
  for (std::size_t a = 0; a < d; ++a) rate += sigma_[a] / grid_.axis(a).spacing();
  const double horizon = spec_.horizon();
  if (cfg_.steps == 0) {
    steps_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon * rate / cfg_.cfl - 1e-12)));
  } else {
    steps_ = cfg_.steps;
  }
  dt_ = horizon / static_cast<double>(steps_);
  cfl_number_ = dt_ * rate;
  if (cfl_number_ > cfg_.cfl * (1.0 + 1e-12))
    throw CflViolation("time step violates the CFL bound: " + fmt(cfl_number_) + " > " + fmt(cfg_.cfl),
                       cfl_number_);
}

void HjiSolver::drift_and_cost(double t, std::size_t node, std::vector<double>& f, std::vector<double>& l) const {
  const std::size_t n = spec_.dim();
  const std::size_t d = grid_.axis_count();
  const std::size_t nu = u_grid_.size();
  const std::size_t nv = v_grid_.size();
  double atoms[kMaxAxes];
  grid_.node_coords(node, std::span<double>(atoms, d));
  const auto weights = uniform_weights(particles_);
  const MeasureFeatures features =
      compute_features(n, std::span<const double>(atoms, d), weights, spec_.dynamic_features());
  f.resize(nu * nv * d);
  l.resize(nu * nv * particles_);
  for (std::size_t iu = 0; iu < nu; ++iu) {
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const std::size_t p = iu * nv + iv;
      for (std::size_t i = 0; i < particles_; ++i) {
        const std::span<const double> x(atoms + i * n, n);
        eval_drift(spec_, t, x, features, u_grid_.point(iu), v_grid_.point(iv),
                   std::span<double>(f).subspan(p * d + i * n, n));
        l[p * particles_ + i] = eval_running_cost(spec_, t, x, features, u_grid_.point(iu), v_grid_.point(iv));
      }
    }
  }
}

double HjiSolver::node_hamiltonian(ValueKind kind, double t, std::size_t node,
                                   std::span<const double> gradient) const {
  const std::size_t n = spec_.dim();
  const std::size_t d = grid_.axis_count();
  const std::size_t nu = u_grid_.size();
  const std::size_t nv = v_grid_.size();
  const std::size_t pairs = nu * nv;
  thread_local std::vector<double> f, l, payoff;
  const double* fp;
  const double* lp;
  if (cached_) {
    fp = cache_.data() + node * pairs * (d + particles_);
    lp = fp + pairs * d;
  } else {
    drift_and_cost(t, node, f, l);
    for (std::size_t p = 0; p < pairs; ++p)
      for (std::size_t a = 0; a < d; ++a)
        if (std::abs(f[p * d + a]) > sigma_[a] * (1.0 + 1e-12) + 1e-300)
          throw CflViolation("drift exceeds the sampled dissipation bound at t = " + fmt(t), cfl_number_);
    fp = f.data();
    lp = l.data();
  }
  // costate of particle i is N times the partial derivative (uniform weights 1/N)
  const double big_n = static_cast<double>(particles_);
  const double w = 1.0 / big_n;
  payoff.resize(pairs);
  for (std::size_t p = 0; p < pairs; ++p) {
    double total = 0.0;
    for (std::size_t i = 0; i < particles_; ++i) {
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += big_n * gradient[i * n + c] * fp[p * d + i * n + c];
      total += w * (dot + lp[p * particles_ + i]);
    }
    payoff[p] = total;
  }
  return extremize(kind, payoff, nu, nv).value;
}

ValueField HjiSolver::terminal_field(ValueKind kind) const { return terminal_field(kind, spec_.terminal_cost()); }

ValueField HjiSolver::terminal_field(ValueKind kind, const Expression& terminal_cost) const {
  ValueField field = mfgz::terminal_field(spec_.with_terminal_cost(terminal_cost), grid_, z_measure_, kind);
  return field;
}

ValueField HjiSolver::step_backward(const ValueField& field) const {
  if (!field.grid.same_axes(grid_)) throw InvalidArgument("step_backward: field lives on a different grid");
  if (field.values.size() != grid_.node_count()) throw InvalidArgument("step_backward: value array size mismatch");
  const double t = field.t;
  if (t - dt_ < -1e-9 * spec_.horizon()) throw InvalidArgument("step_backward: would step before t = 0");
  const std::size_t d = grid_.axis_count();
  const std::vector<double>& v = field.values;
  std::vector<double> out(v.size());
  parallel_for(grid_.node_count(), [&](std::size_t begin, std::size_t end, std::size_t) {
    std::size_t idx[kMaxAxes];
    double grad[kMaxAxes];
    for (std::size_t node = begin; node < end; ++node) {
      grid_.multi_index(node, std::span<std::size_t>(idx, d));
      double dissipation = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const GridAxis& ax = grid_.axis(a);
        const double dx = ax.spacing();
        const std::size_t s = grid_.stride(a);
        if (idx[a] == 0) {
          grad[a] = (v[node + s] - v[node]) / dx;
        } else if (idx[a] + 1 == ax.points) {
          grad[a] = (v[node] - v[node - s]) / dx;
        } else {
          grad[a] = (v[node + s] - v[node - s]) / (2.0 * dx);
          dissipation += sigma_[a] * (v[node + s] - 2.0 * v[node] + v[node - s]) / (2.0 * dx);
        }
      }
      const double h = node_hamiltonian(field.kind, t, node, std::span<const double>(grad, d));
      const double next = v[node] + dt_ * (h + dissipation);
      if (!std::isfinite(next)) throw NumericFailure("non-finite value produced at t = " + fmt(t - dt_));
      out[node] = next;
    }
  });
  ValueField result{grid_, std::max(0.0, t - dt_), std::move(out), field.kind, field.z_measure, field.particles};
  return result;
}

HjiSolution HjiSolver::solve(ValueKind kind, std::size_t snapshot_count) const {
  return run(terminal_field(kind), snapshot_count);
}

HjiSolution HjiSolver::solve(ValueKind kind, const Expression& terminal_cost, std::size_t snapshot_count) const {
  return run(terminal_field(kind, terminal_cost), snapshot_count);
}

HjiSolution HjiSolver::run(ValueField field, std::size_t snapshot_count) const {
  HjiSolution sol{field, {}, steps_, dt_, cfl_number_};
  std::vector<bool> keep(steps_ + 1, false);
  if (snapshot_count == 1) keep[steps_] = true;
  if (snapshot_count >= 2) {
    const std::size_t count = std::min(snapshot_count, steps_ + 1);
    for (std::size_t j = 0; j < count; ++j)
      keep[static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(steps_) /
                                                  static_cast<double>(count - 1)))] = true;
  }
  const double horizon = spec_.horizon();
  for (double x : field.values) sol.max_abs_terminal = std::max(sol.max_abs_terminal, std::abs(x));
  sol.max_abs_running_cost = max_abs_l_;
  if (keep[0]) sol.snapshots.push_back({field.t, field.values});
  for (std::size_t k = 1; k <= steps_; ++k) {
    field = step_backward(field);
    field.t = k == steps_ ? 0.0 : horizon * static_cast<double>(steps_ - k) / static_cast<double>(steps_);
    const double bound = sol.max_abs_terminal + (horizon - field.t) * max_abs_l_;
    for (double x : field.values) sol.max_principle_excess = std::max(sol.max_principle_excess, std::abs(x) - bound);
    if (keep[k]) sol.snapshots.push_back({field.t, field.values});
  }
  sol.field = std::move(field);
  return sol;
}

ValueField terminal_field(const GameSpec& spec, const SpatialGrid& grid, const EmpiricalMeasure& z_measure,
                          ValueKind kind) {
  const std::size_t n = spec.dim();
  const std::size_t d = grid.axis_count();
  if (d % n != 0) throw InvalidArgument("grid axis count must be a multiple of the state dimension");
  const std::size_t particles = d / n;
  const auto weights = uniform_weights(particles);
  std::vector<double> values(grid.node_count());
  std::vector<double> atoms(d);
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    grid.node_coords(node, atoms);
    values[node] = terminal_expectation(spec, atoms, weights, z_measure);
  }
  return ValueField{grid, spec.horizon(), std::move(values), kind, z_measure, particles};
}

double field_value_at(const ValueField& field, std::span<const double> atoms) {
  return field.grid.interpolate(field.values, atoms);
}

double comparison_check(const GameSpec& spec, const SpatialGrid& grid, const EmpiricalMeasure& z_measure,
                        ValueKind kind, const SchemeConfig& cfg, const Expression& m_lo, const Expression& m_hi) {
  const HjiSolver solver(spec, grid, z_measure, cfg);
  ValueField lo = solver.terminal_field(kind, m_lo);
  ValueField hi = solver.terminal_field(kind, m_hi);
  double gap = 0.0;
  for (std::size_t i = 0; i < lo.values.size(); ++i) {
    const double g = hi.values[i] - lo.values[i];
    if (g < 0.0) throw InvalidArgument("terminal ordering violated: m_lo > m_hi at grid node " + std::to_string(i));
    gap = i == 0 ? g : std::min(gap, g);
  }
  for (std::size_t k = 1; k <= solver.steps(); ++k) {
    lo = solver.step_backward(lo);
    hi = solver.step_backward(hi);
    for (std::size_t i = 0; i < lo.values.size(); ++i) gap = std::min(gap, hi.values[i] - lo.values[i]);
  }
  return gap;
}

void write_snapshots_csv(std::ostream& out, const SpatialGrid& grid, std::span<const HjiSnapshot> snapshots) {
  const std::size_t d = grid.axis_count();
  out << "t";
  for (std::size_t a = 0; a < d; ++a) out << ",x" << a + 1;
  out << ",value\n";
  std::vector<double> x(d);
  for (const HjiSnapshot& s : snapshots) {
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
      grid.node_coords(node, x);
      out << fmt(s.t);
      for (double c : x) out << ',' << fmt(c);
      out << ',' << fmt(s.values[node]) << '\n';
    }
  }
}

void write_surface_matrix(std::ostream& out, const SpatialGrid& grid, std::span<const HjiSnapshot> snapshots) {
  if (grid.axis_count() != 1) throw InvalidArgument("surface matrix needs a one-axis grid");
  const GridAxis& ax = grid.axis(0);
  out << ax.points;
  for (std::size_t k = 0; k < ax.points; ++k) out << ' ' << fmt(ax.coord(k));
  out << '\n';
  for (const HjiSnapshot& s : snapshots) {
    out << fmt(s.t);
    for (double v : s.values) out << ' ' << fmt(v);
    out << '\n';
  }
}

}  // namespace mfgz
