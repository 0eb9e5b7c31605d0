#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfgz {

/// Exact discrete optimal transport between supply (size n) and demand (size m)
/// with a dense n x m cost matrix (row-major, nonnegative). Solved as a min-cost
/// flow by successive shortest paths with Johnson potentials, so the returned
/// plan is an exact optimum (up to roundoff), never a regularized one.
///
/// Ties between equally short augmenting paths go to the lowest node index,
/// which makes the plan deterministic.
struct TransportSolution {
  std::vector<double> plan;  // n x m row-major
  double cost = 0.0;
};

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace mfgz
