#pragma once

// Closed-loop simulation of the quantized event system under a feedback
// table. The plant state is integrated exactly as during synthesis (true
// states, not cell centers); only the cell id reaches the controller, and only
// at event instants.

#include <lazyfb/dynamics.hpp>
#include <lazyfb/errors.hpp>
#include <lazyfb/hypergraph.hpp>
#include <lazyfb/io.hpp>
#include <lazyfb/lazy.hpp>
#include <lazyfb/partition.hpp>
#include <lazyfb/solver.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lazyfb {

/// Feedback over cells (base) or over cells x previous control (lazy).
struct FeedbackTable {
  enum class Kind { Base, Lazy };

  Kind kind = Kind::Base;
  std::string label;
  std::size_t cells = 0;
  std::size_t controls = 0;
  double lambda = 0.0;
  std::vector<std::optional<ControlIndex>> control; // cells or cells * controls entries
  std::vector<double> value;

  static FeedbackTable from_solution(const Solution &sol, std::size_t controls, std::string label) {
    FeedbackTable t;
    t.kind = Kind::Base;
    t.label = std::move(label);
    t.cells = sol.value.size();
    t.controls = controls;
    t.control = sol.control;
    t.value = sol.value;
    return t;
  }

  static FeedbackTable from_lazy(const LazyFeedback &fb, std::string label) {
    FeedbackTable t;
    t.kind = Kind::Lazy;
    t.label = std::move(label);
    t.cells = fb.base_nodes;
    t.controls = fb.controls;
    t.lambda = fb.lambda;
    t.control = fb.solution.control;
    t.value = fb.solution.value;
    return t;
  }

  std::size_t index(CellId cell, ControlIndex w) const {
    return kind == Kind::Base ? cell : static_cast<std::size_t>(cell) * controls + w;
  }

  std::optional<ControlIndex> lookup(CellId cell, ControlIndex w) const {
    return control.at(index(cell, w));
  }

  double value_at(CellId cell, ControlIndex w) const { return value.at(index(cell, w)); }

  /// Previous control used at the start when none is given: the w with the
  /// smallest value (ties: smallest index). Irrelevant for base tables.
  ControlIndex initial_w(CellId cell) const {
    ControlIndex best = 0;
    if (kind == Kind::Lazy)
      for (ControlIndex w = 1; w < controls; ++w)
        if (value_at(cell, w) < value_at(cell, best))
          best = w;
    return best;
  }
};

struct TableHeader {
  std::string benchmark;
  std::string config_hash;
};

/// Table dump: commented header, then `node,V,u` rows (base) or `cell,w,u,V`
/// rows (lazy). A missing control is written as `-`, an infinite value as `inf`.
inline void write_feedback_table(std::ostream &os, const FeedbackTable &t, const TableHeader &h) {
  const bool lazy = t.kind == FeedbackTable::Kind::Lazy;
  os << "# lazyfb-table 1\n";
  os << "# kind " << (lazy ? "lazy" : "base") << "\n";
  os << "# label " << t.label << "\n";
  os << "# benchmark " << h.benchmark << "\n";
  os << "# config " << h.config_hash << "\n";
  os << "# cells " << t.cells << "\n";
  os << "# controls " << t.controls << "\n";
  os << "# lambda " << io::format_double(t.lambda) << "\n";
  os << (lazy ? "cell,w,u,V\n" : "node,V,u\n");
  const std::size_t W = lazy ? t.controls : 1;
  for (std::size_t c = 0; c < t.cells; ++c)
    for (std::size_t w = 0; w < W; ++w) {
      const std::size_t i = c * W + w;
      const std::string u = t.control[i] ? std::to_string(*t.control[i]) : "-";
      if (lazy)
        os << c << ',' << w << ',' << u << ',' << io::format_double(t.value[i]) << '\n';
      else
        os << c << ',' << io::format_double(t.value[i]) << ',' << u << '\n';
    }
}

inline FeedbackTable read_feedback_table(std::istream &is, TableHeader *header = nullptr) {
  FeedbackTable t;
  TableHeader h;
  std::string line;
  bool columns = false;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string mark, key, val;
      ls >> mark >> key;
      std::getline(ls >> std::ws, val);
      if (key == "kind")
        t.kind = val == "lazy" ? FeedbackTable::Kind::Lazy : FeedbackTable::Kind::Base;
      else if (key == "label")
        t.label = val;
      else if (key == "benchmark")
        h.benchmark = val;
      else if (key == "config")
        h.config_hash = val;
      else if (key == "cells")
        t.cells = std::stoul(val);
      else if (key == "controls")
        t.controls = std::stoul(val);
      else if (key == "lambda")
        t.lambda = io::parse_double(val);
      continue;
    }
    const bool lazy = t.kind == FeedbackTable::Kind::Lazy;
    if (!columns) {
      columns = true;
      const std::size_t n = t.cells * (lazy ? t.controls : 1);
      if (n == 0)
        throw std::runtime_error("feedback table: missing size header");
      t.control.assign(n, std::nullopt);
      t.value.assign(n, kInfinity);
      continue; // column names
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');)
      f.push_back(cell);
    if (f.size() != (lazy ? 4u : 3u))
      throw std::runtime_error("feedback table: malformed row '" + line + "'");
    const std::size_t c = std::stoul(f[0]);
    const std::size_t w = lazy ? std::stoul(f[1]) : 0;
    if (c >= t.cells || (lazy && w >= t.controls))
      throw std::runtime_error("feedback table: row index out of range");
    const std::size_t i = lazy ? c * t.controls + w : c;
    const std::string &u = f[2];
    const std::string &v = lazy ? f[3] : f[1];
    if (u != "-")
      t.control[i] = static_cast<ControlIndex>(std::stoul(u));
    t.value[i] = io::parse_double(v);
    ++row;
  }
  if (row != t.control.size())
    throw std::runtime_error("feedback table: expected " + std::to_string(t.control.size()) +
                             " rows, got " + std::to_string(row));
  if (header)
    *header = h;
  return t;
}

enum class Termination { ReachedTarget, LeftDomain, Outside, EventStall, MaxEvents };

inline const char *to_string(Termination t) {
  switch (t) {
  case Termination::ReachedTarget: return "reached_target";
  case Termination::LeftDomain: return "left_domain";
  case Termination::Outside: return "outside";
  case Termination::EventStall: return "event_stall";
  case Termination::MaxEvents: return "max_events";
  }
  return "?";
}

template <std::size_t N> struct TrajectorySample {
  std::size_t k = 0;     // plant step
  double t = 0.0;        // true time k * T
  Vec<N> x{};
  std::optional<ControlIndex> u; // control applied from this sample on
  bool event = false;
  bool switched = false;
};

template <std::size_t N> struct Trajectory {
  std::vector<TrajectorySample<N>> samples;
  std::size_t events = 0;              // L
  std::size_t switches = 0;            // E, first control not counted without w0
  std::size_t switches_with_initial = 0; // E, first control counted as a change
  double cost = 0.0;                   // accumulated base event cost
  bool reached_target = false;
  Termination reason = Termination::MaxEvents;
  std::optional<ControlIndex> w0;      // previous control supplied by the caller
  ControlIndex start_w = 0;            // w used for the first lazy lookup
  std::vector<std::size_t> event_steps; // k at each event instant, including k = 0
  std::vector<ControlIndex> applied;     // control chosen at each completed event step

  double time_to_target(double T) const {
    return samples.empty() ? 0.0 : static_cast<double>(samples.back().k) * T;
  }

  /// Recount of switches from the applied control sequence.
  std::size_t audit_switches() const {
    std::size_t count = 0;
    std::optional<ControlIndex> prev = w0;
    for (ControlIndex u : applied) {
      if (prev && *prev != u)
        ++count;
      prev = u;
    }
    return count;
  }
};

/// Runs the closed loop from x0 for at most `max_events` event steps.
/// Throws StabilizationGap when the table has no control for the current node.
template <std::size_t N, std::size_t M>
Trajectory<N> run_closed_loop(const Plant<N, M> &plant, const Grid<N> &grid,
                              const std::vector<std::uint8_t> &goal_cells,
                              const FeedbackTable &table, const Vec<N> &x0,
                              std::optional<ControlIndex> w0, std::size_t max_events = 10000) {
  auto cell = grid.locate(x0);
  if (!cell)
    throw ContractViolation("run_closed_loop: initial state outside the domain");
  if (table.cells != grid.cell_count())
    throw ContractViolation("run_closed_loop: feedback table does not match the grid");

  Trajectory<N> traj;
  traj.w0 = w0;
  traj.start_w = w0 ? *w0 : table.initial_w(*cell);
  const double T = plant.sample_period;

  traj.samples.push_back({0, 0.0, x0, std::nullopt, true, false});
  traj.event_steps.push_back(0);
  Vec<N> x = x0;
  std::size_t k = 0;
  std::optional<ControlIndex> prev = w0;
  ControlIndex w = traj.start_w;
  std::vector<TrajectorySample<N>> pending;

  bool finished = false;
  for (std::size_t l = 0; l < max_events && !finished; ++l) {
    if (goal_cells[*cell]) {
      traj.reached_target = true;
      traj.reason = Termination::ReachedTarget;
      finished = true;
      break;
    }
    const auto u = table.lookup(*cell, w);
    if (!u)
      throw StabilizationGap("feedback undefined at cell " + std::to_string(*cell) + " (w=" +
                                 std::to_string(w) + ")",
                             table.index(*cell, w));
    pending.clear();
    const auto step = detail::advance_event(
        plant, grid.geometry(*cell), x, plant.controls[*u], [&](std::size_t j, const Vec<N> &y) {
          pending.push_back({k + j, static_cast<double>(k + j) * T, y, u, false, false});
        });
    if (step.r == 0) {
      traj.reason = Termination::EventStall;
      finished = true;
      break;
    }
    auto &head = traj.samples.back();
    head.u = u;
    if (prev) {
      if (*prev != *u) {
        ++traj.switches;
        ++traj.switches_with_initial;
        head.switched = true;
      }
    } else {
      ++traj.switches_with_initial;
    }
    traj.applied.push_back(*u);
    traj.samples.insert(traj.samples.end(), pending.begin(), pending.end());
    traj.samples.back().event = true;
    traj.samples.back().u.reset();
    k += step.r;
    traj.event_steps.push_back(k);
    traj.cost += step.cost;
    ++traj.events;
    prev = u;
    w = *u;
    if (step.left_domain) {
      traj.reason = Termination::LeftDomain;
      finished = true;
      break;
    }
    cell = grid.locate(step.x_next);
    if (!cell) {
      traj.reason = Termination::Outside;
      finished = true;
      break;
    }
    x = step.x_next;
  }
  if (!finished && goal_cells[*cell]) {
    traj.reached_target = true;
    traj.reason = Termination::ReachedTarget;
  }
  // the final sample has no control of its own; carry the last one for plotting
  if (traj.samples.size() > 1 && !traj.samples.back().u)
    traj.samples.back().u = traj.samples[traj.samples.size() - 2].u;
  return traj;
}

inline std::vector<std::uint8_t> goal_flags(std::size_t cells, const std::vector<CellId> &goal) {
  std::vector<std::uint8_t> flags(cells, 0);
  for (auto c : goal)
    flags.at(c) = 1;
  return flags;
}

struct ComparisonRow {
  std::string label;
  std::size_t events = 0;
  std::size_t switches = 0;
  std::size_t switches_with_initial = 0;
  double cost = 0.0;
  double time = 0.0;
  bool reached_target = false;
  std::string termination;
  std::string error;
};

/// Runs every table from x0 and tabulates L, E, cost and time. Failing runs
/// are recorded in `error` and do not stop the comparison.
template <std::size_t N, std::size_t M>
std::vector<ComparisonRow> compare(const Plant<N, M> &plant, const Grid<N> &grid,
                                   const std::vector<std::uint8_t> &goal_cells,
                                   const std::vector<const FeedbackTable *> &tables,
                                   const Vec<N> &x0, std::size_t max_events = 10000) {
  std::vector<ComparisonRow> rows;
  for (const auto *t : tables) {
    ComparisonRow row;
    row.label = t->label;
    try {
      const auto traj = run_closed_loop(plant, grid, goal_cells, *t, x0, std::nullopt, max_events);
      row.events = traj.events;
      row.switches = traj.switches;
      row.switches_with_initial = traj.switches_with_initial;
      row.cost = traj.cost;
      row.time = traj.time_to_target(plant.sample_period);
      row.reached_target = traj.reached_target;
      row.termination = to_string(traj.reason);
    } catch (const std::exception &e) {
      row.termination = "error";
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_comparison(std::ostream &os, const std::vector<ComparisonRow> &rows) {
  os << "label,events,switches,switches_with_initial,cost,time,reached_target,termination,error\n";
  for (const auto &r : rows)
    os << r.label << ',' << r.events << ',' << r.switches << ',' << r.switches_with_initial << ','
       << io::format_double(r.cost) << ',' << io::format_double(r.time) << ','
       << (r.reached_target ? 1 : 0) << ',' << r.termination << ',' << r.error << '\n';
}

/// CSV: k,t,x1..xn,u_index,u1..um,event_flag,switch_flag
template <std::size_t N, std::size_t M>
void write_trajectory_csv(std::ostream &os, const Trajectory<N> &traj, const ControlGrid<M> &controls,
                          const std::string &config_hash) {
  os << "# config " << config_hash << "\n";
  os << "k,t";
  for (std::size_t i = 1; i <= N; ++i)
    os << ",x" << i;
  os << ",u_index";
  for (std::size_t i = 1; i <= M; ++i)
    os << ",u" << i;
  os << ",event_flag,switch_flag\n";
  for (const auto &s : traj.samples) {
    os << s.k << ',' << io::format_double(s.t);
    for (double v : s.x)
      os << ',' << io::format_double(v);
    if (s.u) {
      os << ',' << *s.u;
      for (double v : controls[*s.u])
        os << ',' << io::format_double(v);
    } else {
      os << ",-";
      for (std::size_t i = 0; i < M; ++i)
        os << ",";
    }
    os << ',' << (s.event ? 1 : 0) << ',' << (s.switched ? 1 : 0) << '\n';
  }
}

/// Two-panel SVG: first control component over time with event ticks (left),
/// state-space path (right). One color per trajectory.
template <std::size_t N, std::size_t M>
void write_trajectory_svg(std::ostream &os, const std::vector<const Trajectory<N> *> &trajs,
                          const std::vector<std::string> &labels, const Box<N> &domain,
                          const ControlGrid<M> &controls, double T) {
  static_assert(N >= 2, "state-space panel needs two coordinates");
  const double W = 420, H = 320, pad = 40;
  const char *colors[] = {"#1f4e9c", "#d0453a", "#2a9d3a", "#8e44ad"};
  double umin = controls[0][0], umax = controls[0][0], tmax = T;
  for (const auto &u : controls.values()) {
    umin = std::min(umin, u[0]);
    umax = std::max(umax, u[0]);
  }
  if (umax == umin)
    umax = umin + 1.0;
  for (const auto *tr : trajs)
    if (!tr->samples.empty())
      tmax = std::max(tmax, tr->samples.back().t);

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << 2 * W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  for (int panel = 0; panel < 2; ++panel)
    os << "<rect x=\"" << panel * W + pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad
       << "\" height=\"" << H - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << pad << "\" y=\"" << pad - 8 << "\">control u1 over time [0, "
     << io::format_double(tmax) << "]</text>\n";
  os << "<text x=\"" << W + pad << "\" y=\"" << pad - 8 << "\">state space (x1, x2)</text>\n";

  auto tx = [&](double t) { return pad + (W - 2 * pad) * t / tmax; };
  auto uy = [&](double u) { return H - pad - (H - 2 * pad) * (u - umin) / (umax - umin); };
  auto sx = [&](double v) {
    return W + pad + (W - 2 * pad) * (v - domain.lower[0]) / (domain.upper[0] - domain.lower[0]);
  };
  auto sy = [&](double v) {
    return H - pad - (H - 2 * pad) * (v - domain.lower[1]) / (domain.upper[1] - domain.lower[1]);
  };

  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto &s = trajs[i]->samples;
    const char *col = colors[i % 4];
    std::ostringstream stair, path;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j].u) {
        const double u = controls[*s[j].u][0];
        const double t1 = j + 1 < s.size() ? s[j + 1].t : s[j].t;
        stair << tx(s[j].t) << ',' << uy(u) << ' ' << tx(t1) << ',' << uy(u) << ' ';
      }
      path << sx(s[j].x[0]) << ',' << sy(s[j].x[1]) << ' ';
      if (s[j].event)
        os << "<line x1=\"" << tx(s[j].t) << "\" y1=\"" << H - pad << "\" x2=\"" << tx(s[j].t)
           << "\" y2=\"" << H - pad + 6 + 6 * static_cast<double>(i) << "\" stroke=\"" << col
           << "\" stroke-opacity=\"0.6\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << stair.str() << "\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << path.str() << "\"/>\n";
    os << "<text x=\"" << W + pad + 5 << "\" y=\"" << pad + 14 * (static_cast<double>(i) + 1)
       << "\" fill=\"" << col << "\">" << (i < labels.size() ? labels[i] : "") << "</text>\n";
  }
  os << "</svg>\n";
}

// -- closed loops on the graph itself ------------------------------------------

/// Follows the feedback with an adversary that always picks the successor of
/// largest V (ties: smallest id). Returns the number of steps to the goal, or
/// nullopt when the feedback is undefined or `max_steps` is exceeded.
inline std::optional<std::size_t> simulate_on_graph(const TransitionHypergraph &g,
                                                    const Solution &sol, NodeId start,
                                                    std::size_t max_steps) {
  NodeId z = start;
  for (std::size_t steps = 0; steps <= max_steps; ++steps) {
    if (g.goal_node(z))
      return steps;
    const auto &u = sol.control[z];
    if (!u)
      return std::nullopt;
    const auto e = find_edge(g, z, *u);
    if (!e)
      return std::nullopt;
    NodeId next = g.targets(*e).front();
    for (NodeId p : g.targets(*e))
      if (sol.value[p] > sol.value[next])
        next = p;
    z = next;
  }
  return std::nullopt;
}

/// Worst case, over all successor choices, of the number of control changes
/// under the feedback of an extended graph from `start`. The previous control
/// of each node is its w component. Returns nullopt if some branch hits an
/// undefined feedback or cycles.
inline std::optional<std::size_t> worst_case_switches(const ExtendedHypergraph &ext,
                                                      const Solution &sol, NodeId start) {
  const auto &g = ext.graph;
  constexpr std::size_t kUnknown = static_cast<std::size_t>(-1);
  constexpr std::size_t kActive = static_cast<std::size_t>(-2);
  constexpr std::size_t kFailed = static_cast<std::size_t>(-3);
  std::vector<std::size_t> memo(g.node_count, kUnknown);

  // iterative post-order DFS
  struct Frame {
    NodeId node;
    EdgeId edge;
    std::size_t next;
  };
  std::vector<Frame> stack;
  auto enter = [&](NodeId z) -> bool {
    if (g.goal_node(z)) {
      memo[z] = 0;
      return false;
    }
    const auto &u = sol.control[z];
    std::optional<EdgeId> e;
    if (u)
      e = find_edge(g, z, *u);
    if (!e) {
      memo[z] = kFailed;
      return false;
    }
    memo[z] = kActive;
    stack.push_back({z, *e, 0});
    return true;
  };
  enter(start);
  while (!stack.empty()) {
    auto &f = stack.back();
    const auto tg = g.targets(f.edge);
    if (f.next < tg.size()) {
      const NodeId p = tg[f.next++];
      if (memo[p] == kActive) {
        memo[start] = kFailed; // cycle: not stabilizing
        return std::nullopt;
      }
      if (memo[p] == kUnknown)
        enter(p);
      continue;
    }
    const std::size_t change = g.edge_control[f.edge] != ext.decode(f.node).w ? 1 : 0;
    std::size_t worst = 0;
    bool failed = false;
    for (NodeId p : tg) {
      if (memo[p] == kFailed)
        failed = true;
      else
        worst = std::max(worst, memo[p]);
    }
    memo[f.node] = failed ? kFailed : worst + change;
    stack.pop_back();
  }
  if (memo[start] == kFailed)
    return std::nullopt;
  return memo[start];
}

} // namespace lazyfb
