#pragma once

// Weighted transition hypergraph of a quantized event system.
//
// One hyperedge per controllable (cell, control) pair, pointing at the set of
// cells reached from the sampled points of the cell. Storage is flat (CSR)
// with an explicit incidence index: for every node, the edges whose target
// set contains it.

#include <lazyfb/dynamics.hpp>
#include <lazyfb/errors.hpp>
#include <lazyfb/io.hpp>
#include <lazyfb/partition.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lazyfb {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

/// Owning edge record, used to hand-build graphs.
struct Hyperedge {
  NodeId source = 0;
  ControlIndex control = 0;
  std::vector<NodeId> targets;
  double weight = 0.0;
};

struct HyperedgeView {
  NodeId source;
  ControlIndex control;
  std::span<const NodeId> targets;
  double weight;
};

struct BuildReport {
  std::size_t pairs_considered = 0;
  std::size_t event_stall = 0;       // some sample never left its event box
  std::size_t left_domain = 0;       // some sample left the state domain
  std::size_t outside = 0;           // some image could not be located
  std::size_t self_loop = 0;         // image set is the source cell only
  std::size_t numerical_failure = 0; // integration produced non-finite values
  std::vector<std::pair<CellId, ControlIndex>> failures;
  double wall_seconds = 0.0;

  std::size_t discarded() const {
    return event_stall + left_domain + outside + self_loop + numerical_failure;
  }
};

struct TransitionHypergraph {
  std::size_t node_count = 0;
  std::size_t control_count = 0;

  std::vector<NodeId> edge_source;
  std::vector<ControlIndex> edge_control;
  std::vector<double> edge_weight;
  std::vector<std::size_t> target_offset{0}; // size edge_count() + 1
  std::vector<NodeId> target_nodes;

  std::vector<std::size_t> incidence_offset; // size node_count + 1
  std::vector<EdgeId> incidence_edges;

  std::vector<NodeId> goal;              // target set O, sorted
  std::vector<std::uint8_t> is_goal;     // indexed by node

  BuildReport report;

  std::size_t edge_count() const { return edge_source.size(); }

  std::span<const NodeId> targets(EdgeId e) const {
    return {target_nodes.data() + target_offset[e], target_offset[e + 1] - target_offset[e]};
  }

  HyperedgeView edge(EdgeId e) const {
    return {edge_source[e], edge_control[e], targets(e), edge_weight[e]};
  }

  /// Edges whose target set contains `node`, in increasing edge id.
  std::span<const EdgeId> incoming(NodeId node) const {
    return {incidence_edges.data() + incidence_offset[node],
            incidence_offset[node + 1] - incidence_offset[node]};
  }

  bool goal_node(NodeId n) const { return is_goal[n] != 0; }

  void set_goal(std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    goal = std::move(nodes);
    is_goal.assign(node_count, 0);
    for (auto n : goal) {
      if (n >= node_count)
        throw ContractViolation("goal node out of range");
      is_goal[n] = 1;
    }
  }

  void push_edge(NodeId source, ControlIndex control, std::span<const NodeId> tgts, double weight) {
    edge_source.push_back(source);
    edge_control.push_back(control);
    edge_weight.push_back(weight);
    target_nodes.insert(target_nodes.end(), tgts.begin(), tgts.end());
    target_offset.push_back(target_nodes.size());
  }

  /// Recomputes the incidence index from the target lists (counting sort).
  void rebuild_incidence() {
    incidence_offset.assign(node_count + 1, 0);
    for (NodeId t : target_nodes)
      ++incidence_offset[t + 1];
    for (std::size_t i = 0; i < node_count; ++i)
      incidence_offset[i + 1] += incidence_offset[i];
    incidence_edges.assign(target_nodes.size(), 0);
    std::vector<std::size_t> fill(incidence_offset.begin(), incidence_offset.end() - 1);
    for (EdgeId e = 0; e < edge_count(); ++e)
      for (NodeId t : targets(e))
        incidence_edges[fill[t]++] = e;
  }

  /// Hand-built graph: target sets are sorted and deduplicated, edges ordered
  /// by (source, control). Nothing else is checked; see validate().
  static TransitionHypergraph from_edges(std::size_t nodes, std::size_t controls,
                                         std::vector<NodeId> goal_nodes,
                                         std::vector<Hyperedge> edges) {
    TransitionHypergraph g;
    g.node_count = nodes;
    g.control_count = controls;
    g.set_goal(std::move(goal_nodes));
    std::stable_sort(edges.begin(), edges.end(), [](const Hyperedge &a, const Hyperedge &b) {
      return a.source != b.source ? a.source < b.source : a.control < b.control;
    });
    for (auto &e : edges) {
      std::sort(e.targets.begin(), e.targets.end());
      e.targets.erase(std::unique(e.targets.begin(), e.targets.end()), e.targets.end());
      for (auto t : e.targets)
        if (t >= nodes)
          throw ContractViolation("from_edges: target node out of range");
      if (e.source >= nodes)
        throw ContractViolation("from_edges: source node out of range");
      g.push_edge(e.source, e.control, e.targets, e.weight);
    }
    g.rebuild_incidence();
    return g;
  }
};

/// Node of the extended state space: a cell paired with the control applied last.
struct ExtNodeId {
  CellId cell = 0;
  ControlIndex w = 0;

  bool operator==(const ExtNodeId &) const = default;
};

/// Hypergraph over cells x controls, linear node id = cell * controls + w.
struct ExtendedHypergraph {
  TransitionHypergraph graph;
  std::size_t base_nodes = 0;
  std::size_t controls = 0;
  double lambda = 0.0;

  NodeId encode(ExtNodeId z) const {
    if (z.cell >= base_nodes || z.w >= controls)
      throw ContractViolation("ExtNodeId out of range");
    return static_cast<NodeId>(static_cast<std::size_t>(z.cell) * controls + z.w);
  }

  ExtNodeId decode(NodeId id) const {
    return {static_cast<CellId>(id / controls), static_cast<ControlIndex>(id % controls)};
  }
};

namespace detail {

enum class PairOutcome { Kept, EventStall, LeftDomain, Outside, SelfLoop, NumericalFailure };

struct CellEdges {
  std::vector<ControlIndex> controls;
  std::vector<double> weights;
  std::vector<std::size_t> sizes;
  std::vector<NodeId> targets;
  BuildReport report;
};

template <std::size_t N, std::size_t M>
void build_cell(const Grid<N> &grid, const Plant<N, M> &plant, const SamplingScheme &scheme,
                CellId cell, CellEdges &out) {
  const auto samples = grid.sample_cell(cell, scheme);
  const auto geom = grid.geometry(cell);
  std::vector<NodeId> image;
  for (ControlIndex u = 0; u < plant.controls.size(); ++u) {
    ++out.report.pairs_considered;
    const auto &uv = plant.controls[u];
    image.clear();
    double weight = 0.0;
    PairOutcome outcome = PairOutcome::Kept;
    for (const auto &x : samples) {
      EventStep<N> step;
      try {
        step = advance_event(plant, geom, x, uv, [](std::size_t, const Vec<N> &) {});
      } catch (const NumericalFailure &) {
        outcome = PairOutcome::NumericalFailure;
        break;
      }
      if (step.r == 0) {
        outcome = PairOutcome::EventStall;
        break;
      }
      if (step.left_domain) {
        outcome = PairOutcome::LeftDomain;
        break;
      }
      const auto next = grid.locate(step.x_next);
      if (!next) {
        outcome = PairOutcome::Outside;
        break;
      }
      image.push_back(*next);
      weight = std::max(weight, step.cost);
    }
    if (outcome == PairOutcome::Kept) {
      std::sort(image.begin(), image.end());
      image.erase(std::unique(image.begin(), image.end()), image.end());
      if (image.size() == 1 && image.front() == cell)
        outcome = PairOutcome::SelfLoop;
      else if (!(weight > 0.0))
        outcome = PairOutcome::EventStall; // zero cost only arises from empty event sums
    }
    switch (outcome) {
    case PairOutcome::Kept:
      out.controls.push_back(u);
      out.weights.push_back(weight);
      out.sizes.push_back(image.size());
      out.targets.insert(out.targets.end(), image.begin(), image.end());
      break;
    case PairOutcome::EventStall: ++out.report.event_stall; break;
    case PairOutcome::LeftDomain: ++out.report.left_domain; break;
    case PairOutcome::Outside: ++out.report.outside; break;
    case PairOutcome::SelfLoop: ++out.report.self_loop; break;
    case PairOutcome::NumericalFailure:
      ++out.report.numerical_failure;
      out.report.failures.emplace_back(cell, u);
      break;
    }
  }
}

} // namespace detail

/// Builds the transition hypergraph. Target cells are absorbing (no outgoing
/// edges). A (cell, control) pair is dropped when any sample stalls, leaves the
/// domain or fails numerically, and when its image is the cell itself.
/// The weight is the maximum event cost over the samples.
template <std::size_t N, std::size_t M>
TransitionHypergraph build_hypergraph(const Grid<N> &grid, const Plant<N, M> &plant,
                                      const SamplingScheme &scheme,
                                      const std::vector<CellId> &target_cells,
                                      unsigned threads = 0) {
  if (target_cells.empty())
    throw ContractViolation("build_hypergraph: empty target set");
  plant.validate();
  const auto t0 = std::chrono::steady_clock::now();

  TransitionHypergraph g;
  g.node_count = grid.cell_count();
  g.control_count = plant.controls.size();
  g.set_goal(std::vector<NodeId>(target_cells.begin(), target_cells.end()));

  const std::size_t cells = grid.cell_count();
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));

  // contiguous cell ranges per worker; merged in cell order for determinism
  std::vector<std::vector<detail::CellEdges>> parts(threads);
  auto work = [&](unsigned w) {
    const std::size_t lo = cells * w / threads;
    const std::size_t hi = cells * (w + 1) / threads;
    auto &mine = parts[w];
    mine.resize(hi - lo);
    for (std::size_t c = lo; c < hi; ++c)
      if (!g.is_goal[c])
        detail::build_cell(grid, plant, scheme, static_cast<CellId>(c), mine[c - lo]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back(work, w);
    for (auto &t : pool)
      t.join();
  }

  std::size_t cell = 0;
  for (auto &part : parts) {
    for (auto &ce : part) {
      std::size_t off = 0;
      for (std::size_t k = 0; k < ce.controls.size(); ++k) {
        g.push_edge(static_cast<NodeId>(cell), ce.controls[k],
                    std::span<const NodeId>(ce.targets.data() + off, ce.sizes[k]), ce.weights[k]);
        off += ce.sizes[k];
      }
      auto &r = g.report;
      r.pairs_considered += ce.report.pairs_considered;
      r.event_stall += ce.report.event_stall;
      r.left_domain += ce.report.left_domain;
      r.outside += ce.report.outside;
      r.self_loop += ce.report.self_loop;
      r.numerical_failure += ce.report.numerical_failure;
      r.failures.insert(r.failures.end(), ce.report.failures.begin(), ce.report.failures.end());
      ++cell;
    }
    part.clear();
    part.shrink_to_fit();
  }
  g.rebuild_incidence();
  g.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

struct ValidationReport {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  BuildReport discards;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks every structural invariant of the graph.
inline ValidationReport validate(const TransitionHypergraph &g) {
  ValidationReport rep;
  rep.nodes = g.node_count;
  rep.edges = g.edge_count();
  rep.discards = g.report;
  auto fail = [&](std::string msg) { rep.violations.push_back(std::move(msg)); };

  const std::size_t E = g.edge_count();
  if (g.edge_control.size() != E || g.edge_weight.size() != E || g.target_offset.size() != E + 1 ||
      g.target_offset.back() != g.target_nodes.size()) {
    fail("edge arrays have inconsistent sizes");
    return rep;
  }
  if (g.is_goal.size() != g.node_count)
    fail("goal flags not sized to node count");

  for (EdgeId e = 0; e < E; ++e) {
    const auto ed = g.edge(e);
    const std::string tag = "edge " + std::to_string(e);
    if (ed.source >= g.node_count)
      fail(tag + ": source out of range");
    if (ed.control >= g.control_count)
      fail(tag + ": control out of range");
    if (!(ed.weight > 0.0) || !std::isfinite(ed.weight))
      fail(tag + ": weight must be positive and finite");
    if (ed.targets.empty())
      fail(tag + ": empty target set");
    for (std::size_t k = 0; k < ed.targets.size(); ++k) {
      if (ed.targets[k] >= g.node_count)
        fail(tag + ": target out of range");
      if (k > 0 && !(ed.targets[k - 1] < ed.targets[k]))
        fail(tag + ": targets not sorted/unique");
    }
    if (e > 0) {
      const auto prev = g.edge(e - 1);
      if (prev.source == ed.source && prev.control == ed.control)
        fail(tag + ": duplicate (source, control)");
      if (prev.source > ed.source || (prev.source == ed.source && prev.control > ed.control))
        fail(tag + ": edges not ordered by (source, control)");
    }
    if (ed.source < g.is_goal.size() && g.is_goal[ed.source])
      fail(tag + ": goal node has an outgoing edge");
  }

  // incidence must be exactly the inverse of the targets relation
  if (g.incidence_offset.size() != g.node_count + 1 ||
      g.incidence_offset.back() != g.incidence_edges.size()) {
    fail("incidence index has inconsistent sizes");
  } else {
    TransitionHypergraph ref;
    ref.node_count = g.node_count;
    ref.edge_source = g.edge_source;
    ref.target_offset = g.target_offset;
    ref.target_nodes = g.target_nodes;
    bool ranges_ok = true;
    for (auto t : g.target_nodes)
      ranges_ok = ranges_ok && t < g.node_count;
    if (ranges_ok) {
      ref.rebuild_incidence();
      if (ref.incidence_offset != g.incidence_offset || ref.incidence_edges != g.incidence_edges)
        fail("incidence index does not match target lists");
    }
  }
  return rep;
}

/// Text dump: a commented header followed by one
/// `source control weight k target_1 ... target_k` line per edge.
inline void write_hypergraph(std::ostream &os, const TransitionHypergraph &g,
                             const std::string &config_hash) {
  os << "# lazyfb-hypergraph 1\n";
  os << "# config " << config_hash << "\n";
  os << "# nodes " << g.node_count << "\n";
  os << "# controls " << g.control_count << "\n";
  os << "# goal " << g.goal.size();
  for (auto n : g.goal)
    os << ' ' << n;
  os << "\n";
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    const auto ed = g.edge(e);
    os << ed.source << ' ' << ed.control << ' ' << io::format_double(ed.weight) << ' '
       << ed.targets.size();
    for (auto t : ed.targets)
      os << ' ' << t;
    os << '\n';
  }
}

inline TransitionHypergraph read_hypergraph(std::istream &is, std::string *config_hash = nullptr) {
  TransitionHypergraph g;
  std::string line;
  std::vector<NodeId> goal;
  bool have_nodes = false;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, key;
      ls >> hash >> key;
      if (key == "config" && config_hash)
        ls >> *config_hash;
      else if (key == "nodes") {
        ls >> g.node_count;
        have_nodes = true;
      } else if (key == "controls")
        ls >> g.control_count;
      else if (key == "goal") {
        std::size_t k = 0;
        ls >> k;
        goal.resize(k);
        for (auto &n : goal)
          ls >> n;
      }
      continue;
    }
    if (!have_nodes)
      throw std::runtime_error("hypergraph dump: missing node count header");
    NodeId src = 0;
    ControlIndex u = 0;
    std::string w;
    std::size_t k = 0;
    if (!(ls >> src >> u >> w >> k))
      throw std::runtime_error("hypergraph dump: malformed edge line");
    std::vector<NodeId> t(k);
    for (auto &n : t)
      if (!(ls >> n))
        throw std::runtime_error("hypergraph dump: truncated target list");
    if (src >= g.node_count || std::any_of(t.begin(), t.end(), [&](NodeId n) { return n >= g.node_count; }))
      throw std::runtime_error("hypergraph dump: node id out of range");
    g.push_edge(src, u, t, io::parse_double(w));
  }
  if (std::any_of(goal.begin(), goal.end(), [&](NodeId n) { return n >= g.node_count; }))
    throw std::runtime_error("hypergraph dump: goal node out of range");
  g.set_goal(std::move(goal));
  g.rebuild_incidence();
  return g;
}

} // namespace lazyfb
