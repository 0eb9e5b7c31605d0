#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mfgz {

/// A law in P2(R^n) stored as weighted atoms. Atoms are packed row-major:
/// atom i occupies atoms()[i*dim, (i+1)*dim).
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(std::size_t dim, std::vector<double> atoms, std::vector<double> weights);

  static EmpiricalMeasure uniform(std::size_t dim, std::vector<double> atoms);
  static EmpiricalMeasure dirac(std::vector<double> point);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> atom(std::size_t i) const noexcept {
    return std::span<const double>(atoms_).subspan(i * dim_, dim_);
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }

  bool has_uniform_weights() const noexcept;

  /// Same weights, new atom positions (validated).
  EmpiricalMeasure with_atoms(std::vector<double> atoms) const;

  /// Atom i of the result is atom perm[i] of this measure (weights follow their atoms).
  EmpiricalMeasure permuted(std::span<const std::size_t> perm) const;

 private:
  std::size_t dim_;
  std::vector<double> atoms_;
  std::vector<double> weights_;
};

/// A transport plan between two empirical measures; plan is source.size() x target.size(), row-major.
struct Coupling {
  EmpiricalMeasure source;
  EmpiricalMeasure target;
  std::vector<double> plan;

  double mass(std::size_t i, std::size_t j) const { return plan[i * target.size() + j]; }
  /// Quadratic transport cost sum pi_ij |x_i - y_j|^2.
  double quadratic_cost() const;
};

enum class LawFamily { gaussian, dirac, uniform };

struct QuantizationSpec {
  LawFamily family = LawFamily::gaussian;
  double mean = 0.0;      // gaussian mean / dirac point
  double variance = 1.0;  // gaussian only
  double lo = 0.0;        // uniform only
  double hi = 1.0;
  std::size_t atom_count = 1;
};

/// Product of the exact-transport cap: N*M above this is rejected for dim > 1.
inline constexpr std::size_t kMaxTransportProduct = 4096;

/// W_p distance, p in {1, 2}. Dim 1 uses sorted quantile matching; higher
/// dimensions use the exact transport solver.
double wasserstein(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);

/// Both routes exposed separately so they can be cross-checked.
double wasserstein_sorted_1d(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);
double wasserstein_transport(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);

/// A W2-optimal coupling.
Coupling optimal_coupling(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2);

/// Deterministic quantile-midpoint quantization of an analytic law.
EmpiricalMeasure quantize(const QuantizationSpec& spec);

/// Inverse standard normal CDF.
double normal_quantile(double p);

enum class Feature { mean, second_moment, mean_sin };

Feature feature_from_name(std::string_view name);
std::string_view feature_name(Feature f);

/// Bit set of features an expression consumes.
struct FeatureMask {
  bool mean = false;
  bool second_moment = false;
  bool mean_sin = false;

  FeatureMask& operator|=(const FeatureMask& o) {
    mean |= o.mean;
    second_moment |= o.second_moment;
    mean_sin |= o.mean_sin;
    return *this;
  }
  bool any() const { return mean || second_moment || mean_sin; }
};

/// Scalar summaries of a law, computed with a fixed left-to-right summation.
struct MeasureFeatures {
  std::vector<double> mean;
  double second_moment = 0.0;
  double mean_sin = 0.0;
};

MeasureFeatures compute_features(std::size_t dim, std::span<const double> atoms,
                                 std::span<const double> weights, const FeatureMask& mask);
MeasureFeatures compute_features(const EmpiricalMeasure& mu, const FeatureMask& mask);

/// Weighted feature; vector-valued for the mean, one-element otherwise.
std::vector<double> measure_feature(const EmpiricalMeasure& mu, Feature feature);
std::vector<double> measure_feature(const EmpiricalMeasure& mu, std::string_view feature);

}  // namespace mfgz
