#include "mfgz/lifted.hpp"

#include <algorithm>
#include <cmath>

#include "mfgz/errors.hpp"

namespace mfgz {

MeasureFunctional MeasureFunctional::mean_power(int k, std::size_t component) {
  if (k != 1 && k != 2) throw InvalidArgument("mean_power: k must be 1 or 2");
  MeasureFunctional f;
  f.kind_ = Kind::mean_power;
  f.power_ = k;
  f.component_ = component;
  return f;
}

MeasureFunctional MeasureFunctional::squared_mean(std::size_t component) {
  MeasureFunctional f;
  f.kind_ = Kind::squared_mean;
  f.component_ = component;
  return f;
}

MeasureFunctional MeasureFunctional::expectation_of(Expression phi, std::size_t dim) {
  const ExpressionInfo& info = phi.info();
  if (info.uses_time || info.u_count || info.v_count || info.z_count || info.features.any())
    throw InvalidArgument("expectation_of: phi may only reference x");
  if (info.x_count > dim) throw InvalidArgument("expectation_of: phi references x beyond dim");
  MeasureFunctional f;
  f.kind_ = Kind::expectation_of;
  f.dim_ = dim;
  for (std::size_t c = 0; c < dim; ++c) f.grad_phi_.push_back(phi.derivative(VarKind::x, c));
  f.phi_ = std::move(phi);
  return f;
}

std::string MeasureFunctional::name() const {
  switch (kind_) {
    case Kind::mean_power: return power_ == 1 ? "mean" : "second_moment";
    case Kind::squared_mean: return "squared_mean";
    case Kind::expectation_of: return "E[" + phi_.to_string() + "]";
  }
  return "?";
}

double MeasureFunctional::value(const EmpiricalMeasure& mu) const {
  double total = 0.0;
  switch (kind_) {
    case Kind::mean_power:
    case Kind::squared_mean: {
      if (component_ >= mu.dim()) throw InvalidArgument("functional component beyond measure dimension");
      for (std::size_t i = 0; i < mu.size(); ++i) {
        const double x = mu.atom(i)[component_];
        total += mu.weight(i) * (kind_ == Kind::mean_power && power_ == 2 ? x * x : x);
      }
      return kind_ == Kind::squared_mean ? total * total : total;
    }
    case Kind::expectation_of: {
      if (mu.dim() != dim_) throw InvalidArgument("functional dimension mismatch");
      EvalContext ctx;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        ctx.x = mu.atom(i);
        total += mu.weight(i) * phi_.evaluate(ctx);
      }
      return total;
    }
  }
  return total;
}

Costate MeasureFunctional::gradient(const EmpiricalMeasure& mu) const {
  Costate g = Costate::constant(mu.size(), mu.dim(), 0.0);
  switch (kind_) {
    case Kind::mean_power:
      if (component_ >= mu.dim()) throw InvalidArgument("functional component beyond measure dimension");
      for (std::size_t i = 0; i < mu.size(); ++i)
        g.values[i * mu.dim() + component_] = power_ == 1 ? 1.0 : 2.0 * mu.atom(i)[component_];
      break;
    case Kind::squared_mean: {
      if (component_ >= mu.dim()) throw InvalidArgument("functional component beyond measure dimension");
      double mean = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) mean += mu.weight(i) * mu.atom(i)[component_];
      for (std::size_t i = 0; i < mu.size(); ++i) g.values[i * mu.dim() + component_] = 2.0 * mean;
      break;
    }
    case Kind::expectation_of: {
      if (mu.dim() != dim_) throw InvalidArgument("functional dimension mismatch");
      EvalContext ctx;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        ctx.x = mu.atom(i);
        for (std::size_t c = 0; c < dim_; ++c) g.values[i * dim_ + c] = grad_phi_[c].evaluate(ctx);
      }
      break;
    }
  }
  return g;
}

double gradient_fd_check(const MeasureFunctional& fun, const EmpiricalMeasure& mu, double h) {
  if (!(h > 0.0)) throw InvalidArgument("gradient_fd_check: h must be positive");
  if (!mu.has_uniform_weights()) throw InvalidArgument("gradient_fd_check: the particle lift needs uniform weights");
  const Costate g = fun.gradient(mu);
  const double n = static_cast<double>(mu.size());
  std::vector<double> atoms(mu.atoms().begin(), mu.atoms().end());
  double worst = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double saved = atoms[k];
    atoms[k] = saved + h;
    const double plus = fun.value(mu.with_atoms(atoms));
    atoms[k] = saved - h;
    const double minus = fun.value(mu.with_atoms(atoms));
    atoms[k] = saved;
    const double fd = (plus - minus) / (2.0 * h);
    const double expected = g.values[k] / n;
    worst = std::max(worst, std::abs(fd - expected) / (std::abs(expected) + 1e-12));
  }
  return worst;
}

double chain_rule_check(const MeasureFunctional& fun, const GameSpec& spec, const ParticleState& state,
                        const ControlPath& u_path, const ControlPath& v_path, double dt, const IntegratorConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidArgument("chain_rule_check: dt must be positive");
  const ParticleState later = propagate(spec, state, u_path, v_path, state.time + dt, cfg);
  const double lhs = (fun.value(later.measure) - fun.value(state.measure)) / dt;

  const TimeMesh& mesh = u_path.mesh;
  const double pos = (state.time - mesh.t0) / mesh.step();
  const std::size_t k = std::min(mesh.steps - 1, static_cast<std::size_t>(std::max(0.0, std::floor(pos + 1e-12))));
  const Costate g = fun.gradient(state.measure);
  const MeasureFeatures features = compute_features(state.measure, spec.dynamic_features());
  std::vector<double> drift(spec.dim());
  double rhs = 0.0;
  for (std::size_t i = 0; i < state.measure.size(); ++i) {
    eval_drift(spec, state.time, state.measure.atom(i), features, u_path.at_step(k), v_path.at_step(k), drift);
    double dot = 0.0;
    for (std::size_t c = 0; c < spec.dim(); ++c) dot += g.at(i)[c] * drift[c];
    rhs += state.measure.weight(i) * dot;
  }
  return std::abs(lhs - rhs);
}

}  // namespace mfgz
