#include <lazyfb/partition.hpp>
#include <lazyfb/plants.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace lazyfb;

namespace {

Grid<2> unit_grid() { return Grid<2>(Box<2>({0.0, 0.0}, {1.0, 1.0}), {2, 2}); }
Grid<2> pendulum_grid() { return Grid<2>(Box<2>({-10.0, -8.0}, {10.0, 8.0}), {128, 128}); }

} // namespace

TEST(Box, RejectsEmptyAxis) {
  EXPECT_THROW(Box<2>({0.0, 0.0}, {1.0, 0.0}), ContractViolation);
  EXPECT_THROW(Box<1>({2.0}, {1.0}), ContractViolation);
}

TEST(Grid, RejectsZeroResolution) {
  EXPECT_THROW(Grid<2>(Box<2>({0.0, 0.0}, {1.0, 1.0}), {0, 2}), ContractViolation);
}

TEST(Grid, CellCountIsProduct) {
  Grid<2> g(Box<2>({0.0, 0.0}, {1.0, 1.0}), {7, 3});
  EXPECT_EQ(g.cell_count(), 21u);
}

TEST(Locate, CornerCell) {
  const auto g = unit_grid();
  const auto id = g.locate({0.1, 0.1});
  ASSERT_TRUE(id);
  EXPECT_EQ(g.multi_index(*id), (Grid<2>::Index{0, 0}));
}

TEST(Locate, UpperBoundaryClampsToLastCell) {
  const auto g = unit_grid();
  const auto id = g.locate({1.0, 1.0});
  ASSERT_TRUE(id);
  EXPECT_EQ(g.multi_index(*id), (Grid<2>::Index{1, 1}));
}

TEST(Locate, HalfOpenInteriorBoundary) {
  const auto g = unit_grid();
  EXPECT_EQ(g.multi_index(*g.locate({0.5, 0.0})), (Grid<2>::Index{1, 0}));
}

TEST(Locate, OutsideAndNaN) {
  const auto g = unit_grid();
  EXPECT_FALSE(g.locate({-0.01, 0.5}));
  EXPECT_FALSE(g.locate({0.5, 1.0 + 1e-12}));
  EXPECT_FALSE(g.locate({std::nan(""), 0.5}));
}

TEST(Locate, PendulumInitialState) {
  const auto g = pendulum_grid();
  const auto id = g.locate({std::numbers::pi + 0.5, 0.0});
  ASSERT_TRUE(id);
  // widths 20/128 and 16/128
  const auto i = static_cast<std::size_t>(std::floor((std::numbers::pi + 0.5 + 10.0) / (20.0 / 128.0)));
  const auto j = static_cast<std::size_t>(std::floor((0.0 + 8.0) / (16.0 / 128.0)));
  EXPECT_EQ(i, 87u);
  EXPECT_EQ(j, 64u);
  EXPECT_EQ(g.multi_index(*id), (Grid<2>::Index{i, j}));
  EXPECT_EQ(*id, i * 128 + j);
}

TEST(Geometry, OneDimensional) {
  Grid<1> g(Box<1>({0.0}, {1.0}), {2});
  EXPECT_DOUBLE_EQ(g.geometry(0).center[0], 0.25);
  EXPECT_DOUBLE_EQ(g.geometry(0).radius[0], 0.25);
  EXPECT_DOUBLE_EQ(g.geometry(1).center[0], 0.75);
  EXPECT_DOUBLE_EQ(g.geometry(1).radius[0], 0.25);
}

TEST(Geometry, PendulumFirstCell) {
  Grid<1> g(Box<1>({-10.0}, {10.0}), {128});
  const auto geo = g.geometry(0);
  EXPECT_NEAR(geo.center[0], -10.0 + 10.0 / 128.0, 1e-14);
  EXPECT_NEAR(geo.radius[0], 10.0 / 128.0, 1e-15);
  EXPECT_EQ(*g.locate(geo.center), 0u);
}

TEST(Geometry, CenterPlusRadiusAreCorners) {
  const auto g = pendulum_grid();
  for (CellId id : {0u, 777u, 16383u}) {
    const auto geo = g.geometry(id);
    const auto b = g.cell_box(id);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(geo.center[i] - geo.radius[i], b.lower[i], 1e-12);
      EXPECT_NEAR(geo.center[i] + geo.radius[i], b.upper[i], 1e-12);
    }
  }
}

TEST(Geometry, InvalidIdThrows) {
  const auto g = unit_grid();
  EXPECT_THROW(g.geometry(4), ContractViolation);
  EXPECT_THROW(g.linear({2, 0}), ContractViolation);
}

TEST(SampleCell, SingleSampleIsCenter) {
  const auto g = unit_grid();
  const auto pts = g.sample_cell(3, {1});
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], g.geometry(3).center);
}

TEST(SampleCell, ThreePerAxisGivesCornersMidpointsCenter) {
  const auto g = unit_grid();
  const auto pts = g.sample_cell(0, {3});
  ASSERT_EQ(pts.size(), 9u);
  for (double a : {0.0, 0.25, 0.5})
    for (double b : {0.0, 0.25, 0.5})
      EXPECT_NE(std::find(pts.begin(), pts.end(), Vec<2>{a, b}), pts.end()) << a << "," << b;
}

TEST(SampleCell, TwoPerAxisGivesCorners) {
  const auto g = unit_grid();
  const auto pts = g.sample_cell(0, {2});
  ASSERT_EQ(pts.size(), 4u);
  for (double a : {0.0, 0.5})
    for (double b : {0.0, 0.5})
      EXPECT_NE(std::find(pts.begin(), pts.end(), Vec<2>{a, b}), pts.end());
}

TEST(SampleCell, PointsLieInClosedCell) {
  const auto g = pendulum_grid();
  for (std::size_t s : {1u, 2u, 3u, 4u, 5u})
    for (CellId id : {0u, 5000u, 16383u}) {
      const auto b = g.cell_box(id);
      for (const auto &p : g.sample_cell(id, {s}))
        EXPECT_TRUE(b.contains(p));
    }
}

TEST(SampleCell, ZeroDensityRejected) {
  EXPECT_THROW(unit_grid().sample_cell(0, {0}), ContractViolation);
}

TEST(TargetCells, PendulumTargetHas64Cells) {
  const auto g = pendulum_grid();
  const auto cells = g.target_cells(Box<2>({-0.625, -0.5}, {0.625, 0.5}));
  EXPECT_EQ(cells.size(), 64u);
}

TEST(TargetCells, WholeDomainAndTinyBox) {
  const auto g = unit_grid();
  EXPECT_EQ(g.target_cells(g.domain()).size(), 4u);
  EXPECT_TRUE(g.target_cells(Box<2>({0.1, 0.1}, {0.2, 0.2})).empty());
}

TEST(TargetCells, SubsetOfTargetAndDisjoint) {
  const auto g = pendulum_grid();
  const Box<2> target({-1.3, -0.7}, {2.1, 0.9});
  const auto cells = g.target_cells(target);
  ASSERT_FALSE(cells.empty());
  EXPECT_TRUE(std::is_sorted(cells.begin(), cells.end()));
  EXPECT_EQ(std::adjacent_find(cells.begin(), cells.end()), cells.end());
  for (auto id : cells) {
    const auto b = g.cell_box(id);
    EXPECT_TRUE(target.contains(b.lower));
    EXPECT_TRUE(target.contains(b.upper));
  }
}

TEST(GridProperties, CenterRoundTrip) {
  Grid<2> g(Box<2>({-3.0, 1.0}, {5.0, 2.5}), {16, 8});
  for (CellId id = 0; id < g.cell_count(); ++id) {
    EXPECT_EQ(*g.locate(g.geometry(id).center), id);
    EXPECT_EQ(g.linear(g.multi_index(id)), id);
  }
}

TEST(GridProperties, RandomStatesLieInTheirCell) {
  const auto g = pendulum_grid();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-10.0, 10.0), uy(-8.0, 8.0);
  for (int i = 0; i < 5000; ++i) {
    const Vec<2> x{ux(rng), uy(rng)};
    const auto id = g.locate(x);
    ASSERT_TRUE(id);
    EXPECT_TRUE(g.cell_box(*id).contains(x));
  }
}

TEST(GridProperties, LastAxisVariesFastest) {
  Grid<3> g(Box<3>({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), {2, 3, 4});
  EXPECT_EQ(g.linear({0, 0, 1}), 1u);
  EXPECT_EQ(g.linear({0, 1, 0}), 4u);
  EXPECT_EQ(g.linear({1, 0, 0}), 12u);
}
