#pragma once

// Min-max shortest paths on transition hypergraphs.
//
// A hyperedge (Q, N) can only be used once every node of N is finalized; its
// value is then w(Q, N) + max_{P in N} V(P), which is the V of the node just
// finalized. Readiness is tracked with a per-edge counter of unfinalized
// targets. The queue uses lazy deletion: stale entries are skipped on pop.

#include <lazyfb/errors.hpp>
#include <lazyfb/hypergraph.hpp>

#include <cassert>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace lazyfb {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct SolverStats {
  std::size_t pops = 0;
  std::size_t relaxations = 0;
  double wall_seconds = 0.0;
  /// Finalized values were nondecreasing in pop order.
  bool monotone = true;
};

struct Solution {
  std::vector<double> value;                      // V, +inf off the stabilizable set
  std::vector<std::optional<ControlIndex>> control;
  SolverStats stats;

  bool stabilizable(NodeId n) const { return std::isfinite(value[n]); }
};

namespace detail {

/// `edge_cost(e, sol)` is evaluated when edge e becomes ready; the candidate
/// value for its source is edge_cost + V(just finalized node).
template <class EdgeCost>
Solution minmax_core(const TransitionHypergraph &g,
                     const std::vector<std::optional<ControlIndex>> *goal_controls,
                     EdgeCost &&edge_cost) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = g.node_count;
  Solution sol;
  sol.value.assign(n, kInfinity);
  sol.control.assign(n, std::nullopt);

  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (NodeId p : g.goal) {
    sol.value[p] = 0.0;
    if (goal_controls)
      sol.control[p] = (*goal_controls)[p];
    queue.emplace(0.0, p);
  }

  std::vector<std::uint32_t> pending(g.edge_count());
  for (EdgeId e = 0; e < g.edge_count(); ++e)
    pending[e] = static_cast<std::uint32_t>(g.target_offset[e + 1] - g.target_offset[e]);
  std::vector<std::uint8_t> done(n, 0);

  double last = 0.0;
  while (!queue.empty()) {
    const auto [v, p] = queue.top();
    queue.pop();
    if (done[p] || v != sol.value[p])
      continue;
    done[p] = 1;
    ++sol.stats.pops;
    if (v < last)
      sol.stats.monotone = false;
    assert(v >= last && "finalized values must be nondecreasing");
    last = v;

    for (EdgeId e : g.incoming(p)) {
      if (--pending[e] != 0)
        continue;
      const NodeId q = g.edge_source[e];
      if (done[q])
        continue;
      const double cand = edge_cost(e, sol) + v;
      if (sol.value[q] > cand) {
        sol.value[q] = cand;
        sol.control[q] = g.edge_control[e];
        ++sol.stats.relaxations;
        queue.emplace(cand, q);
      }
    }
  }
  sol.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

} // namespace detail

/// MinMax-Dijkstra. Weights must be positive; unreachable nodes keep V = inf.
inline Solution minmax_dijkstra(const TransitionHypergraph &g) {
  return detail::minmax_core(g, nullptr,
                             [&g](EdgeId e, const Solution &) { return g.edge_weight[e]; });
}

enum class SigmaKind { WorstSuccessor, MeanMismatch };

/// Control-mismatch penalty of applying u before landing in N (all of N finalized).
/// WorstSuccessor compares against the control of the successor with largest V
/// (ties: smallest node id); MeanMismatch averages the mismatch over N.
inline double sigma(SigmaKind kind, ControlIndex u, std::span<const NodeId> successors,
                    const Solution &sol) {
  if (successors.empty())
    return 0.0;
  auto mismatch = [&](NodeId p) {
    const auto &c = sol.control[p];
    return (c && *c == u) ? 0.0 : 1.0;
  };
  if (kind == SigmaKind::WorstSuccessor) {
    NodeId arg = successors.front();
    for (NodeId p : successors)
      if (sol.value[p] > sol.value[arg])
        arg = p;
    return mismatch(arg);
  }
  double sum = 0.0;
  for (NodeId p : successors)
    sum += mismatch(p);
  return sum / static_cast<double>(successors.size());
}

/// Single-pass heuristic: goal nodes start with control u0, and an edge's
/// value is (1 - lambda) w + lambda sigma(u, N) + V(P).
inline Solution heuristic_dijkstra(const TransitionHypergraph &g, double lambda, SigmaKind kind,
                                   const std::vector<std::optional<ControlIndex>> &goal_controls) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ContractViolation("heuristic_dijkstra: lambda must lie in [0, 1)");
  if (goal_controls.size() != g.node_count)
    throw ContractViolation("heuristic_dijkstra: goal control table must cover every node");
  for (NodeId p : g.goal)
    if (!goal_controls[p])
      throw ContractViolation("heuristic_dijkstra: every goal node needs an initial control");
  return detail::minmax_core(g, &goal_controls, [&](EdgeId e, const Solution &sol) {
    return (1.0 - lambda) * g.edge_weight[e] +
           lambda * sigma(kind, g.edge_control[e], g.targets(e), sol);
  });
}

/// Same initial control on every goal node.
inline std::vector<std::optional<ControlIndex>> uniform_goal_controls(const TransitionHypergraph &g,
                                                                      ControlIndex u) {
  std::vector<std::optional<ControlIndex>> out(g.node_count);
  for (NodeId p : g.goal)
    out[p] = u;
  return out;
}

/// Gauss-Seidel fixed-point iteration of V(Q) = min_e [w_e + max_{P in N_e} V(P)],
/// V = 0 on the goal, started from +inf. Stops after a sweep without change
/// larger than `tol` or after `max_iters` sweeps.
inline std::vector<double> value_iteration_oracle(const TransitionHypergraph &g,
                                                  std::size_t max_iters = 0, double tol = 0.0) {
  if (max_iters == 0)
    max_iters = g.node_count + 2;
  std::vector<double> v(g.node_count, kInfinity);
  for (NodeId p : g.goal)
    v[p] = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const NodeId q = g.edge_source[e];
      if (g.goal_node(q))
        continue;
      double worst = 0.0;
      for (NodeId p : g.targets(e))
        worst = std::max(worst, v[p]);
      const double cand = g.edge_weight[e] + worst;
      if (cand < v[q]) {
        if (!std::isfinite(v[q]) || v[q] - cand > tol)
          changed = true;
        v[q] = cand;
      }
    }
    if (!changed)
      break;
  }
  return v;
}

/// Exact worst-case minimum number of control changes from `start` to the
/// goal of an extended graph. Runs MinMax-Dijkstra with integer weights
/// K * switch + 1 where K exceeds every possible path length, so the value
/// divided by K (rounded down) is the switch count and the +1 forces progress.
inline std::optional<std::size_t> min_switch_oracle(const ExtendedHypergraph &ext, NodeId start) {
  const auto &g = ext.graph;
  if (start >= g.node_count)
    throw ContractViolation("min_switch_oracle: start node out of range");
  if (g.node_count > (std::size_t{1} << 20))
    throw ContractViolation("min_switch_oracle: graph too large for the exact oracle");
  if (g.goal_node(start))
    return 0;
  const double scale = static_cast<double>(g.node_count + 1);
  TransitionHypergraph counted = g;
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto prev = ext.decode(g.edge_source[e]).w;
    counted.edge_weight[e] = (g.edge_control[e] != prev ? scale : 0.0) + 1.0;
  }
  const auto sol = minmax_dijkstra(counted);
  if (!sol.stabilizable(start))
    return std::nullopt;
  return static_cast<std::size_t>(std::floor(sol.value[start] / scale));
}

/// Edge of `source` with control `u`, if any. Edges are ordered by (source, control).
inline std::optional<EdgeId> find_edge(const TransitionHypergraph &g, NodeId source,
                                       ControlIndex u) {
  auto lo = std::lower_bound(g.edge_source.begin(), g.edge_source.end(), source);
  for (auto it = lo; it != g.edge_source.end() && *it == source; ++it) {
    const auto e = static_cast<EdgeId>(it - g.edge_source.begin());
    if (g.edge_control[e] == u)
      return e;
  }
  return std::nullopt;
}

} // namespace lazyfb
