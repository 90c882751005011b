#include <lazyfb/fixtures.hpp>
#include <lazyfb/hypergraph.hpp>
#include <lazyfb/lazy.hpp>
#include <lazyfb/plants.hpp>
#include <lazyfb/simulate.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace lazyfb;

namespace {

// x' = u on [0, 1], 8 cells, target cell 0
struct Line {
  Plant<1, 1> plant = scalar_integrator(Box<1>({0.0}, {1.0}),
                                        ControlGrid<1>(std::vector<Vec<1>>{{-1.0}, {1.0}}), 0.03);
  Grid<1> grid{Box<1>({0.0}, {1.0}), {8}};
  std::vector<CellId> target{0};
  TransitionHypergraph graph = build_hypergraph(grid, plant, {3}, target);
  std::vector<std::uint8_t> goal = goal_flags(8, target);
};

struct SmallBatch {
  Benchmark<2, 2> b;
  TransitionHypergraph g;
  std::vector<std::uint8_t> goal;
  FeedbackTable base, lazy;

  SmallBatch() : b(make_batch()) {
    g = build_hypergraph(b.grid, b.plant, {3}, b.target_cells);
    goal = goal_flags(b.grid.cell_count(), b.target_cells);
    base = FeedbackTable::from_solution(minmax_dijkstra(g), g.control_count, "base");
    lazy = FeedbackTable::from_lazy(solve_lazy(g, b.lambda), "lazy");
  }
};

const SmallBatch &batch() {
  static const SmallBatch s;
  return s;
}

} // namespace

TEST(ClosedLoop, StartInTarget) {
  const Line l;
  const auto t = FeedbackTable::from_solution(minmax_dijkstra(l.graph), 2, "base");
  const auto tr = run_closed_loop(l.plant, l.grid, l.goal, t, Vec<1>{0.05}, std::nullopt);
  EXPECT_TRUE(tr.reached_target);
  EXPECT_EQ(tr.events, 0u);
  EXPECT_EQ(tr.switches, 0u);
  EXPECT_EQ(tr.cost, 0.0);
}

TEST(ClosedLoop, LineReachesTargetWithoutSwitching) {
  const Line l;
  const auto t = FeedbackTable::from_solution(minmax_dijkstra(l.graph), 2, "base");
  const auto tr = run_closed_loop(l.plant, l.grid, l.goal, t, Vec<1>{0.93}, std::nullopt);
  ASSERT_TRUE(tr.reached_target);
  EXPECT_EQ(tr.reason, Termination::ReachedTarget);
  EXPECT_EQ(tr.switches, 0u);
  EXPECT_EQ(tr.switches_with_initial, 1u);
  EXPECT_EQ(tr.events, tr.applied.size());
  // unit running cost: accumulated cost equals elapsed time
  EXPECT_NEAR(tr.cost, tr.time_to_target(0.03), 1e-12);
  // final state lies in the target cell
  EXPECT_LT(tr.samples.back().x[0], 0.125);
}

TEST(ClosedLoop, TrueTimeReconstruction) {
  const auto &s = batch();
  const auto tr = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.base, s.b.initial_states[0], std::nullopt);
  ASSERT_TRUE(tr.reached_target);
  ASSERT_EQ(tr.event_steps.size(), tr.events + 1);
  // k(l + 1) = k(l) + r(x(l), u(l)) with r recomputed from the stored event states
  for (std::size_t l = 0; l < tr.events; ++l) {
    const auto &start = tr.samples[tr.event_steps[l]];
    ASSERT_EQ(start.k, tr.event_steps[l]);
    const auto step = event_step(s.b.plant, s.b.grid, start.x, s.b.plant.controls[tr.applied[l]]);
    EXPECT_EQ(tr.event_steps[l + 1], tr.event_steps[l] + step.r);
  }
  EXPECT_EQ(tr.samples.size(), tr.event_steps.back() + 1);
}

TEST(ClosedLoop, EventConsistency) {
  const auto &s = batch();
  const auto tr = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.lazy, s.b.initial_states[0], std::nullopt);
  ASSERT_TRUE(tr.reached_target);
  for (std::size_t l = 0; l < tr.events; ++l) {
    const auto k0 = tr.event_steps[l], k1 = tr.event_steps[l + 1];
    const auto cell = *s.b.grid.locate(tr.samples[k0].x);
    const auto box = s.b.grid.cell_box(cell); // e_r = 1
    EXPECT_TRUE(tr.samples[k0].event);
    for (auto k = k0 + 1; k < k1; ++k) {
      EXPECT_TRUE(box.contains(tr.samples[k].x));
      EXPECT_FALSE(tr.samples[k].event);
    }
    EXPECT_FALSE(box.contains(tr.samples[k1].x));
    EXPECT_TRUE(tr.samples[k1].event);
  }
}

TEST(ClosedLoop, SwitchAuditAndLazyConsistency) {
  const auto &s = batch();
  for (const auto *t : {&s.base, &s.lazy}) {
    const auto tr = run_closed_loop(s.b.plant, s.b.grid, s.goal, *t, s.b.initial_states[0], std::nullopt);
    EXPECT_EQ(tr.audit_switches(), tr.switches);
    EXPECT_LE(tr.switches, tr.events);
    std::size_t flagged = 0;
    for (const auto &smp : tr.samples)
      flagged += smp.switched ? 1 : 0;
    EXPECT_EQ(flagged, tr.switches);
    if (t->kind == FeedbackTable::Kind::Lazy) {
      // the w used at event l is the control applied at event l - 1
      for (std::size_t l = 1; l < tr.events; ++l) {
        const auto cell = *s.b.grid.locate(tr.samples[tr.event_steps[l]].x);
        EXPECT_EQ(t->lookup(cell, tr.applied[l - 1]), tr.applied[l]);
      }
      const auto cell0 = *s.b.grid.locate(s.b.initial_states[0]);
      EXPECT_EQ(tr.start_w, t->initial_w(cell0));
    }
  }
}

TEST(ClosedLoop, GivenPreviousControlCountsFirstChange) {
  const auto &s = batch();
  const auto free = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.base, s.b.initial_states[0], std::nullopt);
  const ControlIndex other = free.applied[0] == 0 ? 1 : 0;
  const auto given = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.base, s.b.initial_states[0], other);
  EXPECT_EQ(given.switches, free.switches + 1);
  EXPECT_EQ(given.audit_switches(), given.switches);
}

TEST(ClosedLoop, UndefinedFeedbackThrows) {
  const Line l;
  auto t = FeedbackTable::from_solution(minmax_dijkstra(l.graph), 2, "base");
  t.control[5].reset();
  try {
    run_closed_loop(l.plant, l.grid, l.goal, t, Vec<1>{0.7}, std::nullopt);
    FAIL() << "expected StabilizationGap";
  } catch (const StabilizationGap &e) {
    EXPECT_EQ(e.node(), 5u);
  }
}

TEST(ClosedLoop, OutOfDomainStartRejected) {
  const Line l;
  const auto t = FeedbackTable::from_solution(minmax_dijkstra(l.graph), 2, "base");
  EXPECT_THROW(run_closed_loop(l.plant, l.grid, l.goal, t, Vec<1>{1.5}, std::nullopt), ContractViolation);
}

TEST(ClosedLoop, MaxEventsStops) {
  const Line l;
  const auto t = FeedbackTable::from_solution(minmax_dijkstra(l.graph), 2, "base");
  const auto tr = run_closed_loop(l.plant, l.grid, l.goal, t, Vec<1>{0.93}, std::nullopt, 2);
  EXPECT_FALSE(tr.reached_target);
  EXPECT_EQ(tr.reason, Termination::MaxEvents);
  EXPECT_EQ(tr.events, 2u);
}

TEST(Compare, IdenticalFeedbackGivesIdenticalRows) {
  const auto &s = batch();
  auto broken = s.base;
  broken.label = "broken";
  std::fill(broken.control.begin(), broken.control.end(), std::nullopt);
  const auto rows = compare(s.b.plant, s.b.grid, s.goal, {&s.lazy, &s.lazy, &broken}, s.b.initial_states[0]);
  ASSERT_EQ(rows.size(), 3u);
  std::ostringstream a, b;
  write_comparison(a, {rows[0]});
  write_comparison(b, {rows[1]});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(rows[2].termination, "error");
  EXPECT_FALSE(rows[2].error.empty());
}

TEST(Output, TrajectoryCsv) {
  const auto &s = batch();
  const auto tr = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.lazy, s.b.initial_states[0], std::nullopt);
  std::ostringstream os;
  write_trajectory_csv(os, tr, s.b.plant.controls, "abc");
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# config abc");
  std::getline(in, line);
  EXPECT_EQ(line, "k,t,x1,x2,u_index,u1,u2,event_flag,switch_flag");
  std::size_t rows = 0, events = 0;
  while (std::getline(in, line)) {
    ++rows;
    events += line.find(",1,0") != std::string::npos || line.ends_with(",1,1") ? 1 : 0;
  }
  EXPECT_EQ(rows, tr.samples.size());
}

TEST(Output, Svg) {
  const auto &s = batch();
  const auto a = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.base, s.b.initial_states[0], std::nullopt);
  const auto b = run_closed_loop(s.b.plant, s.b.grid, s.goal, s.lazy, s.b.initial_states[0], std::nullopt);
  std::ostringstream os;
  write_trajectory_svg(os, {&a, &b}, {"base", "lazy"}, s.b.plant.domain, s.b.plant.controls, 1.0);
  const auto svg = os.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find(">lazy<"), std::string::npos);
}

TEST(Output, FeedbackTableRoundTrip) {
  const auto &s = batch();
  for (const auto *t : {&s.base, &s.lazy}) {
    std::stringstream io;
    write_feedback_table(io, *t, {"batch", "0123"});
    TableHeader h;
    const auto back = read_feedback_table(io, &h);
    EXPECT_EQ(h.benchmark, "batch");
    EXPECT_EQ(h.config_hash, "0123");
    EXPECT_EQ(back.kind, t->kind);
    EXPECT_EQ(back.label, t->label);
    EXPECT_EQ(back.control, t->control);
    EXPECT_EQ(back.value, t->value);
    EXPECT_EQ(back.lambda, t->lambda);
  }
}

TEST(Output, TruncatedTableRejected) {
  std::istringstream in("# kind base\n# cells 3\n# controls 1\nnode,V,u\n0,0,-\n");
  EXPECT_THROW(read_feedback_table(in), std::runtime_error);
}

TEST(GraphRuns, WorstCaseMatchesSingleBranch) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto g = fixtures::random_small_system(s, true);
    const auto ext = extend(g, 0.99);
    const auto lz = solve_lazy(ext);
    for (NodeId z = 0; z < ext.graph.node_count; ++z)
      if (std::isfinite(lz.solution.value[z]))
        EXPECT_TRUE(worst_case_switches(ext, lz.solution, z));
      else
        EXPECT_FALSE(worst_case_switches(ext, lz.solution, z));
  }
}
