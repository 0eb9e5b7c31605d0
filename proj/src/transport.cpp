#include "mfgz/transport.hpp"

#include <algorithm>
#include <limits>

#include "mfgz/errors.hpp"

namespace mfgz {

namespace {

constexpr double kMassEps = 1e-15;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (n == 0 || m == 0) throw InvalidArgument("solve_transport: empty marginal");
  if (cost.size() != n * m) throw InvalidArgument("solve_transport: cost matrix size mismatch");
  for (double c : cost) {
    if (!(c >= 0.0)) throw InvalidArgument("solve_transport: costs must be nonnegative");
  }

  // Node layout: 0 = super source, 1..n sources, n+1..n+m sinks, n+m+1 super sink.
  const std::size_t source = 0;
  const std::size_t sink = n + m + 1;
  const std::size_t nodes = n + m + 2;
  auto src_node = [](std::size_t i) { return 1 + i; };
  auto dst_node = [n](std::size_t j) { return 1 + n + j; };

  std::vector<double> supply_left(supply.begin(), supply.end());
  std::vector<double> demand_left(demand.begin(), demand.end());
  std::vector<double> flow(n * m, 0.0);
  std::vector<double> potential(nodes, 0.0);

  std::vector<double> dist(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<char> done(nodes);

  // Residual arc enumeration for a node; calls visit(target, reduced-free cost).
  auto for_each_arc = [&](std::size_t a, auto&& visit) {
    if (a == source) {
      for (std::size_t i = 0; i < n; ++i)
        if (supply_left[i] > kMassEps) visit(src_node(i), 0.0);
    } else if (a <= n) {
      const std::size_t i = a - 1;
      for (std::size_t j = 0; j < m; ++j) visit(dst_node(j), cost[i * m + j]);
    } else if (a < sink) {
      const std::size_t j = a - 1 - n;
      for (std::size_t i = 0; i < n; ++i)
        if (flow[i * m + j] > kMassEps) visit(src_node(i), -cost[i * m + j]);
      if (demand_left[j] > kMassEps) visit(sink, 0.0);
    }
  };

  const std::size_t max_iterations = 4 * (n + 1) * (m + 1) + 16;
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_iterations) throw NumericFailure("solve_transport: augmentation did not terminate");

    bool any_supply = false;
    for (double s : supply_left) any_supply |= s > kMassEps;
    bool any_demand = false;
    for (double d : demand_left) any_demand |= d > kMassEps;
    if (!any_supply || !any_demand) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[source] = 0.0;
    parent[source] = source;
    for (;;) {
      std::size_t a = nodes;
      for (std::size_t k = 0; k < nodes; ++k) {
        if (!done[k] && dist[k] < kInf && (a == nodes || dist[k] < dist[a])) a = k;
      }
      if (a == nodes) break;
      done[a] = 1;
      for_each_arc(a, [&](std::size_t b, double c) {
        const double reduced = std::max(0.0, c + potential[a] - potential[b]);
        if (dist[a] + reduced < dist[b]) {
          dist[b] = dist[a] + reduced;
          parent[b] = a;
        }
      });
    }
    if (!(dist[sink] < kInf)) break;

    for (std::size_t k = 0; k < nodes; ++k)
      if (dist[k] < kInf) potential[k] += dist[k];

    // Bottleneck along the path.
    double push = kInf;
    for (std::size_t b = sink; b != source; b = parent[b]) {
      const std::size_t a = parent[b];
      if (a == source) {
        push = std::min(push, supply_left[b - 1]);
      } else if (b == sink) {
        push = std::min(push, demand_left[a - 1 - n]);
      } else if (a > n) {  // reverse arc sink -> source
        push = std::min(push, flow[(b - 1) * m + (a - 1 - n)]);
      }
    }
    for (std::size_t b = sink; b != source; b = parent[b]) {
      const std::size_t a = parent[b];
      if (a == source) {
        supply_left[b - 1] -= push;
      } else if (b == sink) {
        demand_left[a - 1 - n] -= push;
      } else if (a <= n) {
        flow[(a - 1) * m + (b - 1 - n)] += push;
      } else {
        double& f = flow[(b - 1) * m + (a - 1 - n)];
        f = std::max(0.0, f - push);
      }
    }
  }

  TransportSolution out;
  out.plan = std::move(flow);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.cost += out.plan[i * m + j] * cost[i * m + j];
  return out;
}

}  // namespace mfgz
