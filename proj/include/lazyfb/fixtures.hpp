#pragma once

// Seeded random hypergraphs and hand-built instances for property checks.

#include <lazyfb/hypergraph.hpp>
#include <lazyfb/lazy.hpp>
#include <lazyfb/solver.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace lazyfb::fixtures {

struct RandomGraphSpec {
  std::size_t max_nodes = 50;
  std::size_t max_controls = 5;
  std::size_t max_targets = 4; // per hyperedge
  std::size_t max_goal = 4;
  double max_weight = 10.0;    // weights drawn from (0, max_weight]
  double edge_probability = 0.6;
  bool deterministic = false;  // single-target edges only
};

inline TransitionHypergraph random_hypergraph(std::uint64_t seed, const RandomGraphSpec &spec) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t n = pick(2, spec.max_nodes);
  const std::size_t U = pick(1, spec.max_controls);
  std::vector<NodeId> goal;
  const std::size_t k = pick(1, std::min(spec.max_goal, n - 1));
  while (goal.size() < k) {
    const auto p = static_cast<NodeId>(pick(0, n - 1));
    if (std::find(goal.begin(), goal.end(), p) == goal.end())
      goal.push_back(p);
  }

  std::vector<Hyperedge> edges;
  for (NodeId q = 0; q < n; ++q) {
    if (std::find(goal.begin(), goal.end(), q) != goal.end())
      continue;
    for (ControlIndex u = 0; u < U; ++u) {
      if (unit(rng) >= spec.edge_probability)
        continue;
      Hyperedge e;
      e.source = q;
      e.control = u;
      const std::size_t m = spec.deterministic ? 1 : pick(1, spec.max_targets);
      for (std::size_t j = 0; j < m; ++j)
        e.targets.push_back(static_cast<NodeId>(pick(0, n - 1)));
      e.weight = spec.max_weight * (1.0 - unit(rng)); // (0, max_weight]
      edges.push_back(std::move(e));
    }
  }
  return TransitionHypergraph::from_edges(n, U, std::move(goal), std::move(edges));
}

/// Small system for switch-count checks: at most 30 cells and 4 controls,
/// weights in (0, 0.5] so that a lambda of 0.99 makes a single switch outweigh
/// any difference in accumulated base cost.
inline TransitionHypergraph random_small_system(std::uint64_t seed, bool deterministic) {
  RandomGraphSpec spec;
  spec.max_nodes = 30;
  spec.max_controls = 4;
  spec.max_targets = 3;
  spec.max_goal = 3;
  spec.max_weight = 0.5;
  spec.edge_probability = 0.7;
  spec.deterministic = deterministic;
  return random_hypergraph(seed, spec);
}

/// Four cells P1..P4 (ids 0..3) and controls u1..u3 (ids 0..2); P4 is the goal
/// and u1 is its assumed control. Every cell moves one step right, but P3 only
/// under u2/u3, P2 only under u1/u2, P1 only under u2/u3. Constant u2 reaches P4
/// and needs one change at the end; greedy choices made backwards from P4 pick
/// u3, u1, u2 and end up with three.
struct Counterexample {
  TransitionHypergraph graph;
  ControlIndex goal_control = 0;
  NodeId start = 0;
};

inline Counterexample counterexample() {
  std::vector<Hyperedge> edges = {
      {2, 1, {3}, 1.01}, {2, 2, {3}, 1.0},  // P3: u2, u3 -> P4
      {1, 0, {2}, 1.0},  {1, 1, {2}, 1.01}, // P2: u1, u2 -> P3
      {0, 1, {1}, 1.0},  {0, 2, {1}, 1.01}, // P1: u2, u3 -> P2
  };
  return {TransitionHypergraph::from_edges(4, 3, {3}, std::move(edges)), 0, 0};
}

/// Number of control changes along the run from `start` under a base
/// feedback on a deterministic graph, including the change into `goal_control`
/// on arrival. The first control is not counted. nullopt if the run stalls.
inline std::optional<std::size_t> switches_to_goal(const TransitionHypergraph &g,
                                                   const Solution &sol, NodeId start,
                                                   ControlIndex goal_control) {
  std::vector<ControlIndex> seq;
  NodeId z = start;
  for (std::size_t steps = 0; !g.goal_node(z); ++steps) {
    if (steps > g.node_count || !sol.control[z])
      return std::nullopt;
    const auto e = find_edge(g, z, *sol.control[z]);
    if (!e)
      return std::nullopt;
    seq.push_back(*sol.control[z]);
    z = g.targets(*e).front();
  }
  seq.push_back(goal_control);
  std::size_t count = 0;
  for (std::size_t i = 1; i < seq.size(); ++i)
    count += seq[i] != seq[i - 1] ? 1 : 0;
  return count;
}

/// Same count under a lazy feedback, starting without a previous control.
inline std::optional<std::size_t> switches_to_goal(const ExtendedHypergraph &ext,
                                                   const LazyFeedback &fb, CellId start,
                                                   ControlIndex goal_control) {
  const auto &g = ext.graph;
  std::vector<ControlIndex> seq;
  NodeId z = fb.encode(initial_extended_state(fb, start, std::nullopt));
  for (std::size_t steps = 0; !g.goal_node(z); ++steps) {
    const auto &u = fb.solution.control[z];
    if (steps > g.node_count || !u)
      return std::nullopt;
    const auto e = find_edge(g, z, *u);
    if (!e)
      return std::nullopt;
    seq.push_back(*u);
    z = g.targets(*e).front();
  }
  seq.push_back(goal_control);
  std::size_t count = 0;
  for (std::size_t i = 1; i < seq.size(); ++i)
    count += seq[i] != seq[i - 1] ? 1 : 0;
  return count;
}

} // namespace lazyfb::fixtures
