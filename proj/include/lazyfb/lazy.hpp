#pragma once

// Lazy feedback: MinMax-Dijkstra on the extended state space cells x controls
// with running cost (1 - lambda) * c + lambda * [u != w]. The extended graph is
// derived from the base hypergraph; the dynamics never depend on w, so images
// and base weights are reused for every previous control.

#include <lazyfb/errors.hpp>
#include <lazyfb/hypergraph.hpp>
#include <lazyfb/partition.hpp>
#include <lazyfb/solver.hpp>

#include <optional>
#include <vector>

namespace lazyfb {

inline ExtendedHypergraph extend(const TransitionHypergraph &g, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ContractViolation("extend: lambda must satisfy 0 <= lambda < 1");
  const std::size_t U = g.control_count;
  if (U == 0)
    throw ContractViolation("extend: base graph has no controls");

  ExtendedHypergraph ext;
  ext.base_nodes = g.node_count;
  ext.controls = U;
  ext.lambda = lambda;
  auto &x = ext.graph;
  x.node_count = g.node_count * U;
  x.control_count = U;
  x.edge_source.reserve(g.edge_count() * U);
  x.edge_control.reserve(g.edge_count() * U);
  x.edge_weight.reserve(g.edge_count() * U);
  x.target_offset.reserve(g.edge_count() * U + 1);
  x.target_nodes.reserve(g.target_nodes.size() * U);

  std::vector<NodeId> lifted;
  EdgeId first = 0;
  while (first < g.edge_count()) {
    EdgeId last = first;
    while (last < g.edge_count() && g.edge_source[last] == g.edge_source[first])
      ++last;
    const NodeId p = g.edge_source[first];
    for (ControlIndex w = 0; w < U; ++w) {
      const auto src = static_cast<NodeId>(static_cast<std::size_t>(p) * U + w);
      for (EdgeId e = first; e < last; ++e) {
        const ControlIndex u = g.edge_control[e];
        lifted.clear();
        for (NodeId t : g.targets(e))
          lifted.push_back(static_cast<NodeId>(static_cast<std::size_t>(t) * U + u));
        const double change = u == w ? 0.0 : 1.0;
        x.push_edge(src, u, lifted, (1.0 - lambda) * g.edge_weight[e] + lambda * change);
      }
    }
    first = last;
  }

  std::vector<NodeId> goal;
  goal.reserve(g.goal.size() * U);
  for (NodeId p : g.goal)
    for (ControlIndex w = 0; w < U; ++w)
      goal.push_back(static_cast<NodeId>(static_cast<std::size_t>(p) * U + w));
  x.set_goal(std::move(goal));
  x.rebuild_incidence();

  if (x.node_count != g.node_count * U || x.edge_count() != g.edge_count() * U)
    throw std::logic_error("extend: extended graph size must equal base size times |U|");
  return ext;
}

struct LazyFeedback {
  double lambda = 0.0;
  std::size_t base_nodes = 0;
  std::size_t controls = 0;
  Solution solution; // indexed by extended node id

  NodeId encode(ExtNodeId z) const {
    if (z.cell >= base_nodes || z.w >= controls)
      throw ContractViolation("ExtNodeId out of range");
    return static_cast<NodeId>(static_cast<std::size_t>(z.cell) * controls + z.w);
  }

  std::optional<ControlIndex> control(ExtNodeId z) const { return solution.control[encode(z)]; }
  double value(ExtNodeId z) const { return solution.value[encode(z)]; }
};

inline LazyFeedback solve_lazy(const ExtendedHypergraph &ext) {
  LazyFeedback fb;
  fb.lambda = ext.lambda;
  fb.base_nodes = ext.base_nodes;
  fb.controls = ext.controls;
  fb.solution = minmax_dijkstra(ext.graph);
  return fb;
}

inline LazyFeedback solve_lazy(const TransitionHypergraph &g, double lambda) {
  return solve_lazy(extend(g, lambda));
}

/// Extended start node for a cell. Without a previous control, picks the w
/// with the smallest V_lambda (ties: smallest index).
inline ExtNodeId initial_extended_state(const LazyFeedback &fb, CellId cell,
                                        std::optional<ControlIndex> w0) {
  if (cell >= fb.base_nodes)
    throw ContractViolation("initial_extended_state: cell out of range");
  if (w0) {
    if (*w0 >= fb.controls)
      throw ContractViolation("initial_extended_state: control index out of range");
    return {cell, *w0};
  }
  ControlIndex best = 0;
  for (ControlIndex w = 1; w < fb.controls; ++w)
    if (fb.value({cell, w}) < fb.value({cell, best}))
      best = w;
  return {cell, best};
}

template <std::size_t N>
ExtNodeId initial_extended_state(const LazyFeedback &fb, const Grid<N> &grid, const Vec<N> &x0,
                                 std::optional<ControlIndex> w0) {
  const auto cell = grid.locate(x0);
  if (!cell)
    throw ContractViolation("initial_extended_state: initial state outside the domain");
  return initial_extended_state(fb, *cell, w0);
}

} // namespace lazyfb
