#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "utsp/geometry.hpp"

namespace utsp {

enum class OrderKind { sierpinski, hilbert, zorder, rowmajor, file };

std::string_view to_string(OrderKind kind);
OrderKind parse_order_kind(std::string_view name);

struct Cell {
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// A 2^g x 2^g grid of cells; the order acts on the cell centers.
class GridSpec {
 public:
  static constexpr int kMaxResolution = 30;

  explicit GridSpec(int g);

  int g() const { return g_; }
  std::uint32_t side() const { return std::uint32_t{1} << g_; }
  double spacing() const { return std::ldexp(1.0, -g_); }
  std::uint64_t cell_count() const { return std::uint64_t{1} << (2 * g_); }

  Point center(Cell c) const;
  /// The cell whose center is within kGeoTol of p, if any.
  std::optional<Cell> snap_exact(Point p) const;
  /// Nearest cell center, ties broken toward the lower index on each axis.
  Cell snap_nearest(Point p) const;
  /// Like snap_exact but throws a snap error for off-grid points.
  Cell require_cell(Point p) const;

 private:
  int g_;
};

using OrderKey = std::uint64_t;

OrderKey rowmajor_key(int g, Cell c);
OrderKey zorder_key(int g, Cell c);
OrderKey hilbert_key(int g, Cell c);
/// Sierpinski (triangle bisection) order. The key is the index of the first
/// of the cell's two half-cell triangles visited by the traversal, so keys
/// are injective into [0, 2 * 4^g).
OrderKey sierpinski_key(int g, Cell c);

/// A strict total order on the cells of a grid.
class OrderOracle {
 public:
  static OrderOracle curve(OrderKind kind, GridSpec grid);
  /// Cells listed in `ranking` come first in the listed order; remaining cells
  /// follow in the order of `rest`. A complete listing needs no `rest`.
  static OrderOracle ranked(GridSpec grid, std::span<const Cell> ranking,
                            std::optional<OrderKind> rest = std::nullopt);

  OrderKind kind() const { return kind_; }
  const GridSpec& grid() const { return grid_; }
  std::string name() const;

  OrderKey key(Cell c) const;
  /// Key of an on-grid point; throws a snap error otherwise.
  OrderKey curve_key(Point p) const { return key(grid_.require_cell(p)); }
  std::strong_ordering compare(Point p, Point q) const { return curve_key(p) <=> curve_key(q); }

 private:
  OrderOracle(OrderKind kind, GridSpec grid) : kind_(kind), grid_(grid) {}

  OrderKind kind_;
  GridSpec grid_;
  OrderKind rest_ = OrderKind::rowmajor;
  std::uint64_t listed_ = 0;
  std::shared_ptr<const std::unordered_map<std::uint64_t, std::uint64_t>> ranks_;
};

/// Sorts by the oracle. Throws a duplicate error if two points share a cell.
std::vector<Point> sort_by_order(const OrderOracle& oracle, std::span<const Point> points);

/// Order file: first line "g=<int>", then one "ix iy" line per cell in
/// traversal order. '#' starts a comment.
OrderOracle load_order_file(const std::filesystem::path& path);
OrderOracle read_order(std::istream& in, const std::string& source = "<stream>");
void write_order(std::ostream& out, const OrderOracle& oracle);

}  // namespace utsp
