#pragma once

// Uniform box partitions of a compact state domain.
//
// Cells are half-open boxes [lower, upper) per axis; states on the upper
// boundary of the domain belong to the last cell of that axis. Linear cell
// ids are row-major over the multi-index (last axis varies fastest).

#include <lazyfb/errors.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lazyfb {

template <std::size_t N> using Vec = std::array<double, N>;

using CellId = std::uint32_t;

template <std::size_t N> struct Box {
  Vec<N> lower{};
  Vec<N> upper{};

  Box() = default;
  Box(const Vec<N> &lo, const Vec<N> &hi) : lower(lo), upper(hi) {
    for (std::size_t i = 0; i < N; ++i)
      if (!(lo[i] < hi[i]))
        throw ContractViolation("Box: lower bound must be below upper bound on axis " +
                                std::to_string(i));
  }

  bool contains(const Vec<N> &x) const {
    for (std::size_t i = 0; i < N; ++i)
      if (!(x[i] >= lower[i] && x[i] <= upper[i]))
        return false;
    return true;
  }

  bool operator==(const Box &) const = default;
};

/// Per-axis tensor sampling density used to stand in for "all points of a cell".
struct SamplingScheme {
  std::size_t per_axis = 3;
};

template <std::size_t N> struct CellGeometry {
  Vec<N> center;
  Vec<N> radius;
};

template <std::size_t N> class Grid {
public:
  using Index = std::array<std::size_t, N>;

  Grid(const Box<N> &domain, const Index &resolution)
      : domain_(domain), resolution_(resolution) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < N; ++i) {
      if (resolution[i] == 0)
        throw ContractViolation("Grid: resolution must be positive");
      count *= resolution[i];
      width_[i] = (domain.upper[i] - domain.lower[i]) / static_cast<double>(resolution[i]);
    }
    if (count > std::numeric_limits<CellId>::max())
      throw ContractViolation("Grid: too many cells for 32-bit cell ids");
    cell_count_ = count;
  }

  const Box<N> &domain() const { return domain_; }
  const Index &resolution() const { return resolution_; }
  const Vec<N> &cell_width() const { return width_; }
  std::size_t cell_count() const { return cell_count_; }

  /// Cell containing x, or nullopt when x lies outside the domain (or is NaN).
  std::optional<CellId> locate(const Vec<N> &x) const {
    Index idx{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!(x[i] >= domain_.lower[i] && x[i] <= domain_.upper[i]))
        return std::nullopt;
      const double t = (x[i] - domain_.lower[i]) / width_[i];
      auto k = static_cast<std::size_t>(std::floor(t));
      idx[i] = std::min(k, resolution_[i] - 1);
    }
    return linear(idx);
  }

  CellId linear(const Index &idx) const {
    std::size_t id = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (idx[i] >= resolution_[i])
        throw ContractViolation("Grid: multi-index out of range");
      id = id * resolution_[i] + idx[i];
    }
    return static_cast<CellId>(id);
  }

  Index multi_index(CellId id) const {
    check(id);
    Index idx{};
    std::size_t rest = id;
    for (std::size_t i = N; i-- > 0;) {
      idx[i] = rest % resolution_[i];
      rest /= resolution_[i];
    }
    return idx;
  }

  CellGeometry<N> geometry(CellId id) const {
    const Index idx = multi_index(id);
    CellGeometry<N> g;
    for (std::size_t i = 0; i < N; ++i) {
      g.radius[i] = 0.5 * width_[i];
      g.center[i] = domain_.lower[i] + (static_cast<double>(idx[i]) + 0.5) * width_[i];
    }
    return g;
  }

  /// Closed box of a cell, corners computed from grid lines.
  Box<N> cell_box(CellId id) const {
    const Index idx = multi_index(id);
    Vec<N> lo, hi;
    for (std::size_t i = 0; i < N; ++i) {
      lo[i] = domain_.lower[i] + static_cast<double>(idx[i]) * width_[i];
      hi[i] = idx[i] + 1 == resolution_[i]
                  ? domain_.upper[i]
                  : domain_.lower[i] + static_cast<double>(idx[i] + 1) * width_[i];
    }
    return Box<N>(lo, hi);
  }

  /// Tensor grid of s^N points in the closed cell. Includes the corners for
  /// s >= 2 and the center for odd s; s = 1 yields only the center.
  std::vector<Vec<N>> sample_cell(CellId id, const SamplingScheme &scheme) const {
    if (scheme.per_axis == 0)
      throw ContractViolation("SamplingScheme: per_axis must be >= 1");
    const auto g = geometry(id);
    const std::size_t s = scheme.per_axis;
    std::vector<double> offsets(s, 0.0);
    if (s > 1)
      for (std::size_t k = 0; k < s; ++k)
        offsets[k] = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(s - 1);

    std::size_t total = 1;
    for (std::size_t i = 0; i < N; ++i)
      total *= s;
    std::vector<Vec<N>> out;
    out.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vec<N> p;
      std::size_t rest = flat;
      for (std::size_t i = N; i-- > 0;) {
        const std::size_t k = rest % s;
        rest /= s;
        p[i] = g.center[i] + offsets[k] * g.radius[i];
      }
      out.push_back(p);
    }
    return out;
  }

  /// All cells whose closed box lies inside `target` (sorted ids, possibly empty).
  std::vector<CellId> target_cells(const Box<N> &target) const {
    std::vector<CellId> out;
    for (std::size_t id = 0; id < cell_count_; ++id) {
      const auto b = cell_box(static_cast<CellId>(id));
      bool inside = true;
      for (std::size_t i = 0; i < N && inside; ++i) {
        const double tol = 1e-9 * width_[i];
        inside = b.lower[i] >= target.lower[i] - tol && b.upper[i] <= target.upper[i] + tol;
      }
      if (inside)
        out.push_back(static_cast<CellId>(id));
    }
    return out;
  }

private:
  void check(CellId id) const {
    if (id >= cell_count_)
      throw ContractViolation("Grid: invalid cell id " + std::to_string(id));
  }

  Box<N> domain_;
  Index resolution_;
  Vec<N> width_{};
  std::size_t cell_count_ = 0;
};

} // namespace lazyfb
