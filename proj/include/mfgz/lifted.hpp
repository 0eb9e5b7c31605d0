#pragma once

#include <cstddef>
#include <vector>

#include "mfgz/dynamics.hpp"
#include "mfgz/expression.hpp"
#include "mfgz/hamiltonian.hpp"
#include "mfgz/measure.hpp"

namespace mfgz {

/// A functional of a law with a closed-form measure derivative.
///   mean_power(k): integral of x_c^k        derivative k x_c^{k-1} e_c
///   squared_mean:  (integral of x_c)^2       derivative 2 mean_c e_c
///   expectation_of(phi): integral of phi(x)  derivative grad phi(x)
class MeasureFunctional {
 public:
  enum class Kind { mean_power, squared_mean, expectation_of };

  static MeasureFunctional mean_power(int k, std::size_t component = 0);
  static MeasureFunctional squared_mean(std::size_t component = 0);
  /// phi may reference x1..x_dim only; its gradient is derived symbolically here.
  static MeasureFunctional expectation_of(Expression phi, std::size_t dim);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;

  double value(const EmpiricalMeasure& mu) const;
  Costate gradient(const EmpiricalMeasure& mu) const;

 private:
  MeasureFunctional() = default;

  Kind kind_ = Kind::mean_power;
  int power_ = 1;
  std::size_t component_ = 0;
  std::size_t dim_ = 0;
  Expression phi_;
  std::vector<Expression> grad_phi_;
};

inline double lifted_value(const MeasureFunctional& fun, const EmpiricalMeasure& mu) { return fun.value(mu); }
inline Costate lifted_gradient(const MeasureFunctional& fun, const EmpiricalMeasure& mu) { return fun.gradient(mu); }

/// Central differences of the N-particle lift F(x_1..x_N) = fun(uniform law of
/// the x_i) against (1/N) g(x_i). Returns the max relative error
/// |FD - g/N| / (|g|/N + 1e-12). Requires uniform weights.
double gradient_fd_check(const MeasureFunctional& fun, const EmpiricalMeasure& mu, double h);

/// |(F(mu_{t+dt}) - F(mu_t))/dt - sum_i w_i <g(x_i), f(t, x_i, mu_t, u, v)>|
/// for a time-independent functional, with controls taken at the state's time.
double chain_rule_check(const MeasureFunctional& fun, const GameSpec& spec, const ParticleState& state,
                        const ControlPath& u_path, const ControlPath& v_path, double dt,
                        const IntegratorConfig& cfg = {});

}  // namespace mfgz
