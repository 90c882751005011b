#pragma once

// Sampled-time plants built from a continuous vector field, and the event
// map that bundles plant steps until the state leaves its event box.

#include <lazyfb/errors.hpp>
#include <lazyfb/partition.hpp>

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lazyfb {

using ControlIndex = std::uint32_t;

template <std::size_t M> class ControlGrid {
public:
  ControlGrid() = default;
  explicit ControlGrid(std::vector<Vec<M>> values) : values_(std::move(values)) {
    if (values_.empty())
      throw ContractViolation("ControlGrid: at least one control value required");
    for (std::size_t i = 0; i < values_.size(); ++i)
      for (std::size_t j = i + 1; j < values_.size(); ++j)
        if (values_[i] == values_[j])
          throw ContractViolation("ControlGrid: duplicate control values");
  }

  /// `count` equidistant scalar values on [lo, hi], endpoints included.
  static ControlGrid equidistant(double lo, double hi, std::size_t count)
    requires(M == 1)
  {
    std::vector<Vec<1>> v;
    for (std::size_t k = 0; k < count; ++k)
      v.push_back({count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) /
                                               static_cast<double>(count - 1)});
    return ControlGrid(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  const Vec<M> &operator[](ControlIndex i) const { return values_.at(i); }
  const std::vector<Vec<M>> &values() const { return values_; }

  std::optional<ControlIndex> index_of(const Vec<M> &u) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (values_[i] == u)
        return static_cast<ControlIndex>(i);
    return std::nullopt;
  }

private:
  std::vector<Vec<M>> values_;
};

template <std::size_t N, std::size_t M> struct Plant {
  using State = Vec<N>;
  using Control = Vec<M>;

  std::function<State(const State &, const Control &)> vector_field;
  /// Instantaneous cost q(x, u, t); t is the time elapsed within the current plant step.
  std::function<double(const State &, const Control &, double)> inst_cost;
  double sample_period = 0.01;
  std::size_t rk4_substeps = 5;
  Box<N> domain;
  ControlGrid<M> controls;
  double event_radius = 1.0;
  std::size_t max_event_steps = 1000;

  void validate() const {
    if (!vector_field || !inst_cost)
      throw ContractViolation("Plant: vector field and cost must be set");
    if (!(sample_period > 0.0))
      throw ContractViolation("Plant: sample period must be positive");
    if (rk4_substeps < 1)
      throw ContractViolation("Plant: rk4_substeps must be >= 1");
    if (!(event_radius >= 1.0))
      throw ContractViolation("Plant: event radius must be >= 1");
    if (max_event_steps < 1)
      throw ContractViolation("Plant: max_event_steps must be >= 1");
    if (controls.size() == 0)
      throw ContractViolation("Plant: empty control grid");
  }
};

template <std::size_t N> struct EventStep {
  std::size_t r = 0;
  Vec<N> x_next{};
  double cost = 0.0;
  bool left_domain = false;
};

namespace detail {

template <std::size_t N> bool all_finite(const Vec<N> &x) {
  for (double v : x)
    if (!std::isfinite(v))
      return false;
  return true;
}

template <std::size_t N> Vec<N> axpy(const Vec<N> &x, double a, const Vec<N> &k) {
  Vec<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = x[i] + a * k[i];
  return out;
}

/// One sample period of classical RK4 with trapezoid quadrature of the
/// instantaneous cost over the substep nodes.
template <std::size_t N, std::size_t M>
Vec<N> rk4_period(const Plant<N, M> &plant, const Vec<N> &x0, const Vec<M> &u, double &cost) {
  const auto &f = plant.vector_field;
  const double h = plant.sample_period / static_cast<double>(plant.rk4_substeps);
  Vec<N> x = x0;
  double q_prev = plant.inst_cost(x, u, 0.0);
  cost = 0.0;
  for (std::size_t s = 0; s < plant.rk4_substeps; ++s) {
    const Vec<N> k1 = f(x, u);
    const Vec<N> k2 = f(axpy(x, 0.5 * h, k1), u);
    const Vec<N> k3 = f(axpy(x, 0.5 * h, k2), u);
    const Vec<N> k4 = f(axpy(x, h, k3), u);
    for (std::size_t i = 0; i < N; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(x))
      throw NumericalFailure("rk4: non-finite state");
    const double q = plant.inst_cost(x, u, h * static_cast<double>(s + 1));
    cost += 0.5 * h * (q_prev + q);
    q_prev = q;
  }
  if (!std::isfinite(cost))
    throw NumericalFailure("rk4: non-finite cost");
  return x;
}

/// Iterates the sampled map until the state leaves the event box
/// {y : |y_i - center_i| <= e_r * radius_i} or the domain. `on_step(k, x)` is
/// called after every plant step. Returns r = 0 when no exit happens within
/// max_event_steps.
template <std::size_t N, std::size_t M, class OnStep>
EventStep<N> advance_event(const Plant<N, M> &plant, const CellGeometry<N> &cell, const Vec<N> &x,
                           const Vec<M> &u, OnStep &&on_step) {
  EventStep<N> out;
  Vec<N> cur = x;
  double total = 0.0;
  for (std::size_t k = 1; k <= plant.max_event_steps; ++k) {
    double c = 0.0;
    try {
      cur = rk4_period(plant, cur, u, c);
    } catch (const DomainViolation &) {
      // the field is undefined here: the trajectory has left the modelled region
      out.r = k;
      out.x_next = cur;
      out.cost = total;
      out.left_domain = true;
      return out;
    }
    total += c;
    on_step(k, cur);
    const bool outside = !plant.domain.contains(cur);
    bool exited = outside;
    for (std::size_t i = 0; i < N && !exited; ++i)
      exited = std::abs(cur[i] - cell.center[i]) > plant.event_radius * cell.radius[i];
    if (exited) {
      out.r = k;
      out.x_next = cur;
      out.cost = total;
      out.left_domain = outside;
      return out;
    }
  }
  out.x_next = x;
  return out;
}

} // namespace detail

/// Sampled map f(x, u): rk4_substeps RK4 steps over one sample period.
template <std::size_t N, std::size_t M>
Vec<N> rk4_flow(const Plant<N, M> &plant, const Vec<N> &x, const Vec<M> &u) {
  if (!detail::all_finite(x))
    throw NumericalFailure("rk4_flow: non-finite initial state");
  double c = 0.0;
  return detail::rk4_period(plant, x, u, c);
}

/// Per-period cost: trapezoid quadrature of q along the RK4 substep nodes.
template <std::size_t N, std::size_t M>
double step_cost(const Plant<N, M> &plant, const Vec<N> &x, const Vec<M> &u) {
  if (!detail::all_finite(x))
    throw NumericalFailure("step_cost: non-finite state");
  double c = 0.0;
  detail::rk4_period(plant, x, u, c);
  return c;
}

/// Event map from x, with the event box centred on the cell containing x.
template <std::size_t N, std::size_t M>
EventStep<N> event_step(const Plant<N, M> &plant, const Grid<N> &grid, const Vec<N> &x,
                        const Vec<M> &u) {
  const auto cell = grid.locate(x);
  if (!cell)
    throw ContractViolation("event_step: state outside the grid domain");
  return detail::advance_event(plant, grid.geometry(*cell), x, u, [](std::size_t, const Vec<N> &) {});
}

/// Same as event_step but with the event box of an explicitly given cell;
/// used for sample points on cell boundaries.
template <std::size_t N, std::size_t M>
EventStep<N> event_step_from_cell(const Plant<N, M> &plant, const Grid<N> &grid, CellId cell,
                                  const Vec<N> &x, const Vec<M> &u) {
  return detail::advance_event(plant, grid.geometry(cell), x, u, [](std::size_t, const Vec<N> &) {});
}

} // namespace lazyfb
