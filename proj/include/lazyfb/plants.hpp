#pragma once

// Benchmark plants (inverted pendulum on a cart, thermofluid batch reactor)
// and a few analytic systems used by the test-suites.

#include <lazyfb/dynamics.hpp>
#include <lazyfb/errors.hpp>
#include <lazyfb/partition.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lazyfb {

struct PendulumParams {
  double m = 2.0;   // pendulum mass [kg]
  double M = 8.0;   // cart mass [kg]
  double l = 0.5;   // pendulum length [m]
  double g = 9.8;   // [m/s^2]

  double mass_ratio() const { return m / (m + M); }
};

/// (phi, phi_dot) -> (phi_dot, phi_ddot); phi = 0 is the upright position.
inline Vec<2> pendulum_field(const Vec<2> &x, double u, const PendulumParams &p) {
  const double mr = p.mass_ratio();
  const double phi = x[0];
  const double dphi = x[1];
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double lhs = 4.0 / 3.0 - mr * c * c;
  const double rhs = -u * mr / (p.m * p.l) * c - 0.5 * mr * dphi * dphi * std::sin(2.0 * phi) +
                     p.g / p.l * s;
  return {dphi, rhs / lhs};
}

struct BatchParams {
  double P_el = 3000.0;       // electrical power [W]
  double k_h = 0.84;          // heat transfer coefficient [J/(W s)]
  double c_p = 4180.0;        // heat capacity of water [J/(kg K)]
  double g = 9.81;            // [m/s^2]
  double rho = 998.0;         // density of water [kg/m^3]
  double theta_T3 = 293.15;   // inflow temperature [K]
  double K_A = 1.59e-5;       // outflow parameter [m^3/m]
  double A_h = 0.07;          // cross sectional area [m^2]
};

/// Inflow through valve V1 [m^3/s]; zero for valve angles up to 0.2.
inline double batch_inflow(double u1) {
  return u1 > 0.2 ? 7e-6 * (11.1 * u1 * u1 + 13.1 * u1 + 0.2) : 0.0;
}

/// Fluid volume in the reactor [m^3], defined for levels above 0.26 m.
inline double batch_volume(double level) { return 0.07 * level - 1.9e-3; }

/// (level, temperature) -> derivatives, under (valve angle, heating power).
inline Vec<2> batch_field(const Vec<2> &x, const Vec<2> &u, const BatchParams &p) {
  if (!(x[0] > 0.26))
    throw DomainViolation("batch_field: level must exceed 0.26 m");
  const double q = batch_inflow(u[0]);
  const double dl = (q - p.K_A * std::sqrt(2.0 * p.g * x[0])) / p.A_h;
  const double dtheta =
      (q * (p.theta_T3 - x[1]) + p.P_el * p.k_h * u[1] / (p.rho * p.c_p)) / batch_volume(x[0]);
  return {dl, dtheta};
}

template <std::size_t N, std::size_t M> struct Benchmark {
  static constexpr std::size_t state_dim = N;
  static constexpr std::size_t control_dim = M;

  std::string name;
  Plant<N, M> plant;
  Grid<N> grid;
  Box<N> target;
  std::vector<CellId> target_cells;
  double lambda = 0.0;
  std::vector<Vec<N>> initial_states;
};

struct PendulumSetup {
  PendulumParams params;
  std::size_t resolution = 128;
  std::size_t control_count = 17;
  double control_bound = 64.0;
  double sample_period = 0.01;
  std::size_t rk4_substeps = 5;
  double event_radius = 9.0;
  std::size_t max_event_steps = 1000;
  double lambda = 0.99;
};

/// Pendulum swing-up: X = [-10,10]x[-8,8], U = 17 values in [-64,64],
/// target [-5/8,5/8]x[-1/2,1/2]. The "+t" cost term is time elapsed within
/// the current plant step, so each step costs 0.005 u^2 T + T^2/2.
inline Benchmark<2, 1> make_pendulum(const PendulumSetup &s = {}) {
  Plant<2, 1> plant;
  const PendulumParams p = s.params;
  plant.vector_field = [p](const Vec<2> &x, const Vec<1> &u) { return pendulum_field(x, u[0], p); };
  plant.inst_cost = [](const Vec<2> &, const Vec<1> &u, double t) { return 0.005 * u[0] * u[0] + t; };
  plant.sample_period = s.sample_period;
  plant.rk4_substeps = s.rk4_substeps;
  plant.domain = Box<2>({-10.0, -8.0}, {10.0, 8.0});
  plant.controls = ControlGrid<1>::equidistant(-s.control_bound, s.control_bound, s.control_count);
  plant.event_radius = s.event_radius;
  plant.max_event_steps = s.max_event_steps;
  plant.validate();

  Grid<2> grid(plant.domain, {s.resolution, s.resolution});
  Box<2> target({-0.625, -0.5}, {0.625, 0.5});
  auto cells = grid.target_cells(target);
  return Benchmark<2, 1>{"pendulum", plant, grid, target, std::move(cells), s.lambda,
                         {{std::numbers::pi + 0.5, 0.0}}};
}

struct BatchSetup {
  BatchParams params;
  std::size_t resolution = 64;
  std::size_t valve_count = 12;
  std::size_t heating_levels = 7; // u2 in {0, ..., heating_levels - 1}
  double sample_period = 1.0;
  std::size_t rk4_substeps = 5;
  double event_radius = 1.0;
  std::size_t max_event_steps = 1000;
  double lambda = 0.9;
  double cost_gain = 0.01;
  std::size_t target_block = 2;
  Vec<2> operating_point{0.349, 310.56};
};

/// k x k block of cells whose union has its center nearest to `point`.
inline Box<2> cell_block_around(const Grid<2> &grid, const Vec<2> &point, std::size_t k) {
  Vec<2> lo, hi;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto res = grid.resolution()[i];
    if (k == 0 || k > res)
      throw ContractViolation("cell_block_around: block size out of range");
    const double w = grid.cell_width()[i];
    const double pos = (point[i] - grid.domain().lower[i]) / w - 0.5 * static_cast<double>(k);
    const auto start = static_cast<std::size_t>(
        std::clamp(std::round(pos), 0.0, static_cast<double>(res - k)));
    lo[i] = grid.domain().lower[i] + static_cast<double>(start) * w;
    hi[i] = grid.domain().lower[i] + static_cast<double>(start + k) * w;
  }
  return Box<2>(lo, hi);
}

/// Batch reactor: X = [0.26,0.45] m x [293.15,323.15] K, u1 on an equidistant
/// valve grid, u2 in {0..6}. Controls are ordered valve-major. Running cost is
/// 1 + eps * (normalized squared distance to the operating point + u1^2 + (u2/6)^2).
inline Benchmark<2, 2> make_batch(const BatchSetup &s = {}) {
  Plant<2, 2> plant;
  const BatchParams p = s.params;
  plant.vector_field = [p](const Vec<2> &x, const Vec<2> &u) { return batch_field(x, u, p); };
  plant.domain = Box<2>({0.26, 293.15}, {0.45, 323.15});
  const Vec<2> half{0.5 * (plant.domain.upper[0] - plant.domain.lower[0]),
                    0.5 * (plant.domain.upper[1] - plant.domain.lower[1])};
  const double umax2 = static_cast<double>(s.heating_levels - 1);
  plant.inst_cost = [eps = s.cost_gain, ref = s.operating_point, half,
                     umax2](const Vec<2> &x, const Vec<2> &u, double) {
    const double a = (x[0] - ref[0]) / half[0];
    const double b = (x[1] - ref[1]) / half[1];
    const double h = umax2 > 0 ? u[1] / umax2 : 0.0;
    return 1.0 + eps * (a * a + b * b + u[0] * u[0] + h * h);
  };
  plant.sample_period = s.sample_period;
  plant.rk4_substeps = s.rk4_substeps;
  std::vector<Vec<2>> u;
  const auto valves = ControlGrid<1>::equidistant(0.0, 1.0, s.valve_count);
  for (const auto &v : valves.values())
    for (std::size_t h = 0; h < s.heating_levels; ++h)
      u.push_back({v[0], static_cast<double>(h)});
  plant.controls = ControlGrid<2>(std::move(u));
  plant.event_radius = s.event_radius;
  plant.max_event_steps = s.max_event_steps;
  plant.validate();

  Grid<2> grid(plant.domain, {s.resolution, s.resolution});
  const Box<2> target = cell_block_around(grid, s.operating_point, s.target_block);
  auto cells = grid.target_cells(target);
  return Benchmark<2, 2>{"batch", plant, grid, target, std::move(cells), s.lambda, {{0.275, 295.0}}};
}

using AnyBenchmark = std::variant<Benchmark<2, 1>, Benchmark<2, 2>>;

inline AnyBenchmark make_benchmark(std::string_view name) {
  if (name == "pendulum")
    return make_pendulum();
  if (name == "batch")
    return make_batch();
  throw ContractViolation("unknown benchmark '" + std::string(name) + "'");
}

// -- analytic systems ------------------------------------------------------

/// x' = u on a 1-D domain with unit running cost (cost = elapsed time).
inline Plant<1, 1> scalar_integrator(const Box<1> &domain, ControlGrid<1> controls, double T,
                                     double event_radius = 1.0, std::size_t substeps = 5) {
  Plant<1, 1> p;
  p.vector_field = [](const Vec<1> &, const Vec<1> &u) { return Vec<1>{u[0]}; };
  p.inst_cost = [](const Vec<1> &, const Vec<1> &, double) { return 1.0; };
  p.sample_period = T;
  p.rk4_substeps = substeps;
  p.domain = domain;
  p.controls = std::move(controls);
  p.event_radius = event_radius;
  p.validate();
  return p;
}

/// x' = a x (control ignored); exact flow x exp(a t).
inline Plant<1, 1> linear_decay(double a, double T, std::size_t substeps) {
  Plant<1, 1> p;
  p.vector_field = [a](const Vec<1> &x, const Vec<1> &) { return Vec<1>{a * x[0]}; };
  p.inst_cost = [](const Vec<1> &, const Vec<1> &, double) { return 1.0; };
  p.sample_period = T;
  p.rk4_substeps = substeps;
  p.domain = Box<1>({-1e6}, {1e6});
  p.controls = ControlGrid<1>(std::vector<Vec<1>>{{0.0}});
  p.validate();
  return p;
}

/// x' = 0 on a 2-D box.
inline Plant<2, 1> frozen_plant(const Box<2> &domain, double T) {
  Plant<2, 1> p;
  p.vector_field = [](const Vec<2> &, const Vec<1> &) { return Vec<2>{0.0, 0.0}; };
  p.inst_cost = [](const Vec<2> &, const Vec<1> &, double) { return 1.0; };
  p.sample_period = T;
  p.domain = domain;
  p.controls = ControlGrid<1>(std::vector<Vec<1>>{{0.0}});
  p.validate();
  return p;
}

} // namespace lazyfb
