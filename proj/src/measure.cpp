#include "mfgz/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfgz/errors.hpp"
#include "mfgz/transport.hpp"

namespace mfgz {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> atoms,
                                   std::vector<double> weights)
    : dim_(dim), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (dim_ == 0) throw InvalidArgument("EmpiricalMeasure: dimension must be positive");
  if (weights_.empty()) throw InvalidArgument("EmpiricalMeasure: needs at least one atom");
  if (atoms_.size() != weights_.size() * dim_)
    throw InvalidArgument("EmpiricalMeasure: atom count does not match weights");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw InvalidArgument("EmpiricalMeasure: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("EmpiricalMeasure: weights must sum to 1 (got " + std::to_string(total) + ")");
  for (double a : atoms_) {
    if (!std::isfinite(a)) throw NumericFailure("EmpiricalMeasure: non-finite atom");
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t dim, std::vector<double> atoms) {
  if (dim == 0 || atoms.empty() || atoms.size() % dim != 0)
    throw InvalidArgument("EmpiricalMeasure::uniform: bad atom list");
  const std::size_t n = atoms.size() / dim;
  return EmpiricalMeasure(dim, std::move(atoms), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::vector<double> point) {
  const std::size_t dim = point.size();
  return EmpiricalMeasure(dim, std::move(point), {1.0});
}

bool EmpiricalMeasure::has_uniform_weights() const noexcept {
  return std::all_of(weights_.begin(), weights_.end(),
                     [&](double w) { return w == weights_.front(); });
}

EmpiricalMeasure EmpiricalMeasure::with_atoms(std::vector<double> atoms) const {
  return EmpiricalMeasure(dim_, std::move(atoms), weights_);
}

EmpiricalMeasure EmpiricalMeasure::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != size()) throw InvalidArgument("permuted: permutation length mismatch");
  std::vector<double> atoms(atoms_.size());
  std::vector<double> weights(weights_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const std::size_t src = perm[i];
    if (src >= size()) throw InvalidArgument("permuted: index out of range");
    std::copy_n(atoms_.begin() + static_cast<std::ptrdiff_t>(src * dim_), dim_,
                atoms.begin() + static_cast<std::ptrdiff_t>(i * dim_));
    weights[i] = weights_[src];
  }
  return EmpiricalMeasure(dim_, std::move(atoms), std::move(weights));
}

namespace {

double ground_cost(int p, std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sq += d * d;
  }
  return p == 2 ? sq : std::sqrt(sq);
}

void check_pair(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  if (p != 1 && p != 2) throw InvalidArgument("wasserstein: order must be 1 or 2");
  if (mu1.dim() != mu2.dim()) throw InvalidArgument("wasserstein: dimension mismatch");
}

std::vector<std::size_t> sorted_order(const EmpiricalMeasure& mu) {
  std::vector<std::size_t> idx(mu.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return mu.atom(a)[0] < mu.atom(b)[0]; });
  return idx;
}

// Monotone (north-west corner) plan between sorted 1-D atoms.
std::vector<double> monotone_plan(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  const auto o1 = sorted_order(mu1);
  const auto o2 = sorted_order(mu2);
  const std::size_t m = mu2.size();
  std::vector<double> plan(mu1.size() * m, 0.0);
  std::size_t a = 0;
  std::size_t b = 0;
  double left1 = mu1.weight(o1[0]);
  double left2 = mu2.weight(o2[0]);
  while (a < o1.size() && b < o2.size()) {
    const double mass = std::min(left1, left2);
    plan[o1[a] * m + o2[b]] += mass;
    left1 -= mass;
    left2 -= mass;
    // Advance whichever side is exhausted; on a tie advance both.
    const bool next1 = left1 <= left2;
    const bool next2 = left2 <= left1;
    if (next1) {
      if (++a < o1.size()) left1 = mu1.weight(o1[a]);
    }
    if (next2) {
      if (++b < o2.size()) left2 = mu2.weight(o2[b]);
    }
  }
  return plan;
}

double plan_cost(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2,
                 const std::vector<double>& plan) {
  const std::size_t m = mu2.size();
  double total = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = plan[i * m + j];
      if (mass != 0.0) total += mass * ground_cost(p, mu1.atom(i), mu2.atom(j));
    }
  return total;
}

TransportSolution transport(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  if (mu1.size() * mu2.size() > kMaxTransportProduct)
    throw SizeLimitExceeded("wasserstein: N*M = " + std::to_string(mu1.size() * mu2.size()) +
                            " exceeds exact-transport cap " + std::to_string(kMaxTransportProduct) +
                            "; quantize coarser");
  std::vector<double> cost(mu1.size() * mu2.size());
  for (std::size_t i = 0; i < mu1.size(); ++i)
    for (std::size_t j = 0; j < mu2.size(); ++j)
      cost[i * mu2.size() + j] = ground_cost(p, mu1.atom(i), mu2.atom(j));
  return solve_transport(mu1.weights(), mu2.weights(), cost);
}

double root(int p, double cost) { return p == 2 ? std::sqrt(std::max(0.0, cost)) : std::max(0.0, cost); }

}  // namespace

double Coupling::quadratic_cost() const { return plan_cost(2, source, target, plan); }

double wasserstein_sorted_1d(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  check_pair(p, mu1, mu2);
  if (mu1.dim() != 1) throw InvalidArgument("wasserstein_sorted_1d: requires dim == 1");
  return root(p, plan_cost(p, mu1, mu2, monotone_plan(mu1, mu2)));
}

double wasserstein_transport(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  check_pair(p, mu1, mu2);
  return root(p, transport(p, mu1, mu2).cost);
}

double wasserstein(int p, const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  check_pair(p, mu1, mu2);
  if (mu1.dim() == 1) return wasserstein_sorted_1d(p, mu1, mu2);
  return wasserstein_transport(p, mu1, mu2);
}

Coupling optimal_coupling(const EmpiricalMeasure& mu1, const EmpiricalMeasure& mu2) {
  check_pair(2, mu1, mu2);
  std::vector<double> plan =
      mu1.dim() == 1 ? monotone_plan(mu1, mu2) : transport(2, mu1, mu2).plan;
  return Coupling{mu1, mu2, std::move(plan)};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0,1)");
  // Acklam's rational approximation followed by one Halley step on erfc.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

EmpiricalMeasure quantize(const QuantizationSpec& spec) {
  if (spec.atom_count < 1) throw InvalidArgument("quantize: atom_count must be >= 1");
  const std::size_t n = spec.atom_count;
  switch (spec.family) {
    case LawFamily::dirac:
      return EmpiricalMeasure::dirac({spec.mean});
    case LawFamily::gaussian: {
      if (!(spec.variance >= 0.0)) throw InvalidArgument("quantize: variance must be >= 0");
      const double sd = std::sqrt(spec.variance);
      std::vector<double> atoms(n);
      // Fill the lower half and mirror it so the atom set is exactly symmetric.
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t mirror = n - 1 - i;
        if (mirror < i) {
          atoms[i] = -atoms[mirror];
          continue;
        }
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        atoms[i] = (2 * i + 1 == n) ? 0.0 : normal_quantile(p);
      }
      for (double& a : atoms) a = spec.mean + sd * a;
      return EmpiricalMeasure::uniform(1, std::move(atoms));
    }
    case LawFamily::uniform: {
      if (!(spec.hi >= spec.lo)) throw InvalidArgument("quantize: uniform needs lo <= hi");
      std::vector<double> atoms(n);
      for (std::size_t i = 0; i < n; ++i)
        atoms[i] = spec.lo + (spec.hi - spec.lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      return EmpiricalMeasure::uniform(1, std::move(atoms));
    }
  }
  throw InvalidArgument("quantize: unknown family");
}

Feature feature_from_name(std::string_view name) {
  if (name == "mean") return Feature::mean;
  if (name == "second_moment") return Feature::second_moment;
  if (name == "mean_sin") return Feature::mean_sin;
  throw InvalidArgument("unsupported feature '" + std::string(name) + "'");
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::mean: return "mean";
    case Feature::second_moment: return "second_moment";
    case Feature::mean_sin: return "mean_sin";
  }
  return "?";
}

MeasureFeatures compute_features(std::size_t dim, std::span<const double> atoms,
                                 std::span<const double> weights, const FeatureMask& mask) {
  MeasureFeatures out;
  if (mask.mean) {
    out.mean.assign(dim, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i)
      for (std::size_t k = 0; k < dim; ++k) out.mean[k] += weights[i] * atoms[i * dim + k];
  }
  if (mask.second_moment) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) sq += atoms[i * dim + k] * atoms[i * dim + k];
      out.second_moment += weights[i] * sq;
    }
  }
  if (mask.mean_sin) {
    if (dim != 1) throw InvalidArgument("feature mean_sin requires dim == 1");
    for (std::size_t i = 0; i < weights.size(); ++i) out.mean_sin += weights[i] * std::sin(atoms[i]);
  }
  return out;
}

MeasureFeatures compute_features(const EmpiricalMeasure& mu, const FeatureMask& mask) {
  return compute_features(mu.dim(), mu.atoms(), mu.weights(), mask);
}

std::vector<double> measure_feature(const EmpiricalMeasure& mu, Feature feature) {
  FeatureMask mask;
  switch (feature) {
    case Feature::mean:
      mask.mean = true;
      return compute_features(mu, mask).mean;
    case Feature::second_moment:
      mask.second_moment = true;
      return {compute_features(mu, mask).second_moment};
    case Feature::mean_sin:
      mask.mean_sin = true;
      return {compute_features(mu, mask).mean_sin};
  }
  throw InvalidArgument("unsupported feature");
}

std::vector<double> measure_feature(const EmpiricalMeasure& mu, std::string_view feature) {
  return measure_feature(mu, feature_from_name(feature));
}

}  // namespace mfgz
