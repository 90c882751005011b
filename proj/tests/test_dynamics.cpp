#include <lazyfb/dynamics.hpp>
#include <lazyfb/plants.hpp>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace lazyfb;

namespace {

Plant<1, 1> unit_speed(double T, double er = 1.0) {
  return scalar_integrator(Box<1>({0.0}, {1.0}), ControlGrid<1>(std::vector<Vec<1>>{{1.0}}), T, er);
}

} // namespace

TEST(ControlGrid, PendulumGrid) {
  const auto u = ControlGrid<1>::equidistant(-64.0, 64.0, 17);
  ASSERT_EQ(u.size(), 17u);
  EXPECT_DOUBLE_EQ(u[0][0], -64.0);
  EXPECT_DOUBLE_EQ(u[8][0], 0.0);
  EXPECT_DOUBLE_EQ(u[16][0], 64.0);
  for (ControlIndex i = 1; i < 17; ++i)
    EXPECT_NEAR(u[i][0] - u[i - 1][0], 8.0, 1e-12);
  EXPECT_EQ(u.index_of({8.0}), 9u);
  EXPECT_FALSE(u.index_of({3.0}));
}

TEST(ControlGrid, RejectsDuplicates) {
  EXPECT_THROW(ControlGrid<1>(std::vector<Vec<1>>{{1.0}, {1.0}}), ContractViolation);
}

TEST(Plant, ValidateRejectsBadParameters) {
  auto p = unit_speed(0.1);
  p.event_radius = 0.5;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = unit_speed(0.1);
  p.sample_period = 0.0;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = unit_speed(0.1);
  p.rk4_substeps = 0;
  EXPECT_THROW(p.validate(), ContractViolation);
}

TEST(Rk4Flow, ZeroFieldIsIdentity) {
  const auto p = frozen_plant(Box<2>({0.0, 0.0}, {1.0, 1.0}), 0.3);
  const Vec<2> x{0.3, 0.7};
  EXPECT_EQ(rk4_flow(p, x, {0.0}), x);
}

TEST(Rk4Flow, ConstantFieldIsExact) {
  const auto p = unit_speed(0.01);
  EXPECT_NEAR(rk4_flow(p, {0.2}, {1.0})[0], 0.21, 1e-15);
}

TEST(Rk4Flow, PendulumMatchesReferenceIntegrator) {
  const auto b = make_pendulum();
  const Vec<2> x0{std::numbers::pi + 0.5, 0.0};
  const PendulumParams params;
  for (double u : {0.0, 64.0, -24.0}) {
    using State = std::array<double, 2>;
    State y = x0;
    auto rhs = [&](const State &s, State &d, double) { d = pendulum_field(s, u, params); };
    namespace odeint = boost::numeric::odeint;
    odeint::integrate_adaptive(
        odeint::make_controlled(1e-14, 1e-14, odeint::runge_kutta_dopri5<State>()), rhs, y, 0.0,
        0.01, 1e-4);
    const auto x = rk4_flow(b.plant, x0, {u});
    EXPECT_NEAR(x[0], y[0], 1e-9) << "u=" << u;
    EXPECT_NEAR(x[1], y[1], 1e-9) << "u=" << u;
  }
}

TEST(Rk4Flow, FourthOrderConvergence) {
  // x' = a x on [0, 1]; the global error should drop by 2^4 per halving
  const double a = 1.0, T = 1.0, x0 = 1.0;
  const double exact = x0 * std::exp(a * T);
  const auto e1 = std::abs(rk4_flow(linear_decay(a, T, 8), {x0}, {0.0})[0] - exact);
  const auto e2 = std::abs(rk4_flow(linear_decay(a, T, 16), {x0}, {0.0})[0] - exact);
  EXPECT_NEAR(e1 / e2, 16.0, 2.0);
}

TEST(Rk4Flow, NonFiniteStateFails) {
  auto p = unit_speed(0.1);
  p.vector_field = [](const Vec<1> &, const Vec<1> &) { return Vec<1>{std::nan("")}; };
  EXPECT_THROW(rk4_flow(p, {0.5}, {1.0}), NumericalFailure);
  EXPECT_THROW(rk4_flow(unit_speed(0.1), {std::numeric_limits<double>::infinity()}, {1.0}),
               NumericalFailure);
}

TEST(StepCost, PureTimeCostIsPeriod) {
  EXPECT_NEAR(step_cost(unit_speed(0.05), {0.5}, {1.0}), 0.05, 1e-15);
}

TEST(StepCost, PendulumElapsedTimeTerm) {
  const auto b = make_pendulum();
  const Vec<2> x{std::numbers::pi + 0.5, 0.0};
  const double T = 0.01;
  EXPECT_NEAR(step_cost(b.plant, x, {0.0}), T * T / 2.0, 1e-15);
  EXPECT_NEAR(step_cost(b.plant, x, {64.0}), 0.005 * 64.0 * 64.0 * T + T * T / 2.0, 1e-12);
  EXPECT_NEAR(step_cost(b.plant, x, {64.0}), 0.20485, 1e-12);
}

TEST(EventStep, ZeroFieldStalls) {
  const auto p = frozen_plant(Box<2>({0.0, 0.0}, {1.0, 1.0}), 0.1);
  const Grid<2> g(p.domain, {4, 4});
  const Vec<2> x{0.3, 0.3};
  const auto s = event_step(p, g, x, Vec<1>{0.0});
  EXPECT_EQ(s.r, 0u);
  EXPECT_EQ(s.cost, 0.0);
  EXPECT_EQ(s.x_next, x);
  EXPECT_FALSE(s.left_domain);
}

TEST(EventStep, LinearFlowExitCount) {
  // box [0, 0.25] around 0.125; positions 0.175, 0.225, 0.275
  const auto p = unit_speed(0.05);
  const Grid<1> g(p.domain, {4});
  const auto s = event_step(p, g, Vec<1>{0.125}, Vec<1>{1.0});
  std::size_t expect = 0;
  for (double y = 0.125; y <= 0.25; y += 0.05)
    ++expect;
  EXPECT_EQ(expect, 3u);
  EXPECT_EQ(s.r, expect);
  EXPECT_NEAR(s.x_next[0], 0.275, 1e-12);
  EXPECT_NEAR(s.cost, 3 * 0.05, 1e-12);
  EXPECT_FALSE(s.left_domain);
}

TEST(EventStep, EventRadiusWidensBox) {
  const auto p = unit_speed(0.05, 2.0);
  const Grid<1> g(Box<1>({0.0}, {1.0}), {8});
  // center 0.0625, radius 0.0625, box [-0.0625, 0.1875]
  const auto s = event_step(p, g, Vec<1>{0.0625}, Vec<1>{1.0});
  EXPECT_EQ(s.r, 3u);
}

TEST(EventStep, LeavingDomainIsFlagged) {
  const auto p = unit_speed(0.05, 4.0);
  const Grid<1> g(p.domain, {4});
  const auto s = event_step(p, g, Vec<1>{0.9}, Vec<1>{1.0});
  EXPECT_GT(s.r, 0u);
  EXPECT_TRUE(s.left_domain);
  EXPECT_GT(s.x_next[0], 1.0);
}

TEST(EventStep, BatchEventOnLeavingCell) {
  const auto b = make_batch();
  const Vec<2> x0{0.275, 295.0};
  const auto cell = *b.grid.locate(x0);
  const Vec<2> u = b.plant.controls[b.plant.controls.size() - 1];
  const auto s = event_step(b.plant, b.grid, x0, u);
  ASSERT_GT(s.r, 0u);
  ASSERT_FALSE(s.left_domain);
  EXPECT_NE(*b.grid.locate(s.x_next), cell);
  Vec<2> y = x0;
  for (std::size_t k = 0; k + 1 < s.r; ++k)
    y = rk4_flow(b.plant, y, u);
  EXPECT_TRUE(b.grid.cell_box(cell).contains(y));
}

TEST(EventStep, CostIsSumOfStepCosts) {
  const auto b = make_pendulum();
  const Vec<2> x0{1.3, -2.2};
  for (ControlIndex ui : {0u, 8u, 16u}) {
    const auto u = b.plant.controls[ui];
    const auto s = event_step(b.plant, b.grid, x0, u);
    ASSERT_GT(s.r, 0u);
    Vec<2> y = x0;
    double sum = 0.0;
    for (std::size_t k = 0; k < s.r; ++k) {
      sum += step_cost(b.plant, y, u);
      y = rk4_flow(b.plant, y, u);
    }
    EXPECT_NEAR(s.cost, sum, 1e-12 * sum);
    EXPECT_EQ(y, s.x_next);
  }
}

TEST(EventStep, ExitInvariant) {
  const auto b = make_pendulum();
  const Vec<2> x0{1.3, -2.2};
  const auto geo = b.grid.geometry(*b.grid.locate(x0));
  auto inside = [&](const Vec<2> &y) {
    for (std::size_t i = 0; i < 2; ++i)
      if (std::abs(y[i] - geo.center[i]) > b.plant.event_radius * geo.radius[i])
        return false;
    return true;
  };
  for (ControlIndex ui = 0; ui < b.plant.controls.size(); ++ui) {
    const auto u = b.plant.controls[ui];
    const auto s = event_step(b.plant, b.grid, x0, u);
    if (s.r == 0 || s.left_domain)
      continue;
    Vec<2> y = x0;
    for (std::size_t k = 0; k + 1 < s.r; ++k)
      y = rk4_flow(b.plant, y, u);
    EXPECT_TRUE(inside(y));
    EXPECT_FALSE(inside(s.x_next));
  }
}

TEST(EventStep, StallTimeoutReturnsInput) {
  auto p = unit_speed(0.05);
  p.max_event_steps = 2;
  const Grid<1> g(p.domain, {4});
  const auto s = event_step(p, g, Vec<1>{0.125}, Vec<1>{1.0});
  EXPECT_EQ(s.r, 0u);
  EXPECT_EQ(s.x_next[0], 0.125);
  EXPECT_EQ(s.cost, 0.0);
}
