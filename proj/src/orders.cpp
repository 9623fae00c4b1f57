#include "utsp/orders.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "utsp/error.hpp"

namespace utsp {

std::string_view to_string(OrderKind kind) {
  switch (kind) {
    case OrderKind::sierpinski: return "sierpinski";
    case OrderKind::hilbert: return "hilbert";
    case OrderKind::zorder: return "zorder";
    case OrderKind::rowmajor: return "rowmajor";
    case OrderKind::file: return "file";
  }
  return "unknown";
}

OrderKind parse_order_kind(std::string_view name) {
  for (OrderKind k : {OrderKind::sierpinski, OrderKind::hilbert, OrderKind::zorder,
                      OrderKind::rowmajor, OrderKind::file}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorKind::parameter, "unknown order kind '" + std::string(name) + "'");
}

GridSpec::GridSpec(int g) : g_(g) {
  if (g < 1 || g > kMaxResolution) {
    throw Error(ErrorKind::parameter,
                "grid resolution g must lie in [1, " + std::to_string(kMaxResolution) + "]");
  }
}

Point GridSpec::center(Cell c) const {
  double h = spacing();
  return {(c.ix + 0.5) * h, (c.iy + 0.5) * h};
}

std::optional<Cell> GridSpec::snap_exact(Point p) const {
  Cell c = snap_nearest(p);
  Point q = center(c);
  if (std::abs(q.x - p.x) <= kGeoTol && std::abs(q.y - p.y) <= kGeoTol) return c;
  return std::nullopt;
}

Cell GridSpec::snap_nearest(Point p) const {
  // Cell i covers [i h, (i+1) h); a point exactly on a boundary goes to the
  // lower cell, which is also the nearest-center tie-break.
  auto axis = [&](double v) -> std::uint32_t {
    double scaled = std::ldexp(v, g_);
    double idx = std::ceil(scaled) - 1.0;
    if (idx < 0.0) idx = 0.0;
    double top = static_cast<double>(side() - 1);
    if (idx > top) idx = top;
    return static_cast<std::uint32_t>(idx);
  };
  return {axis(p.x), axis(p.y)};
}

Cell GridSpec::require_cell(Point p) const {
  if (auto c = snap_exact(p)) return *c;
  std::ostringstream msg;
  msg.precision(17);
  msg << "point (" << p.x << ", " << p.y << ") is not a cell center at g=" << g_;
  throw Error(ErrorKind::snap, msg.str());
}

OrderKey rowmajor_key(int g, Cell c) {
  return (static_cast<std::uint64_t>(c.iy) << g) | c.ix;
}

namespace {

std::uint64_t spread_bits(std::uint32_t v) {
  std::uint64_t x = v;
  x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
  x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
  x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

struct IPoint {
  std::int64_t x;
  std::int64_t y;
};

__extension__ typedef __int128 wide_int;

wide_int orient(IPoint o, IPoint a, IPoint b) {
  return static_cast<wide_int>(a.x - o.x) * (b.y - o.y) -
         static_cast<wide_int>(a.y - o.y) * (b.x - o.x);
}

// Traversal index of the depth-2g triangle containing p. Triangles are
// (entry, right-angle vertex, exit); bisecting at the hypotenuse midpoint m
// gives the children (entry, m, right) then (right, m, exit).
std::uint64_t sierpinski_triangle_index(int g, IPoint p) {
  const std::int64_t s = std::int64_t{4} << g;
  IPoint a{0, 0}, b{s, 0}, c{s, s};
  std::uint64_t index = 0;
  if (p.y > p.x) {
    a = {s, s};
    b = {0, s};
    c = {0, 0};
    index = 1;
  }
  for (int depth = 0; depth < 2 * g; ++depth) {
    IPoint m{(a.x + c.x) / 2, (a.y + c.y) / 2};
    bool first = (orient(b, m, p) > 0) == (orient(b, m, a) > 0);
    index <<= 1;
    if (first) {
      c = b;
      b = m;
    } else {
      index |= 1;
      a = b;
      b = m;
    }
  }
  return index;
}

}  // namespace

OrderKey zorder_key(int, Cell c) { return spread_bits(c.ix) | (spread_bits(c.iy) << 1); }

OrderKey hilbert_key(int g, Cell c) {
  std::uint64_t n = std::uint64_t{1} << g;
  std::uint64_t x = c.ix;
  std::uint64_t y = c.iy;
  std::uint64_t d = 0;
  for (std::uint64_t s = n >> 1; s > 0; s >>= 1) {
    std::uint64_t rx = (x & s) ? 1 : 0;
    std::uint64_t ry = (y & s) ? 1 : 0;
    d += s * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

OrderKey sierpinski_key(int g, Cell c) {
  // Probe points a quarter cell left and right of the center: the cell's
  // splitting diagonal always separates them, and neither lies on a
  // coarser bisection line.
  std::int64_t cx = 4 * static_cast<std::int64_t>(c.ix) + 2;
  std::int64_t cy = 4 * static_cast<std::int64_t>(c.iy) + 2;
  return std::min(sierpinski_triangle_index(g, {cx - 1, cy}),
                  sierpinski_triangle_index(g, {cx + 1, cy}));
}

namespace {

OrderKey builtin_key(OrderKind kind, int g, Cell c) {
  switch (kind) {
    case OrderKind::sierpinski: return sierpinski_key(g, c);
    case OrderKind::hilbert: return hilbert_key(g, c);
    case OrderKind::zorder: return zorder_key(g, c);
    case OrderKind::rowmajor: return rowmajor_key(g, c);
    case OrderKind::file: break;
  }
  throw Error(ErrorKind::parameter, "file orders have no built-in key");
}

std::uint64_t cell_id(int g, Cell c) { return rowmajor_key(g, c); }

}  // namespace

OrderOracle OrderOracle::curve(OrderKind kind, GridSpec grid) {
  if (kind == OrderKind::file) {
    throw Error(ErrorKind::parameter, "file orders are built with ranked() or load_order_file()");
  }
  return OrderOracle(kind, grid);
}

OrderOracle OrderOracle::ranked(GridSpec grid, std::span<const Cell> ranking,
                                std::optional<OrderKind> rest) {
  if (rest && *rest == OrderKind::file) {
    throw Error(ErrorKind::parameter, "fallback order must be a built-in curve");
  }
  if (!rest && ranking.size() != grid.cell_count()) {
    throw Error(ErrorKind::format, "ranking lists " + std::to_string(ranking.size()) +
                                       " cells, grid has " + std::to_string(grid.cell_count()));
  }
  auto ranks = std::make_shared<std::unordered_map<std::uint64_t, std::uint64_t>>();
  ranks->reserve(ranking.size());
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const Cell& c = ranking[i];
    if (c.ix >= grid.side() || c.iy >= grid.side()) {
      throw Error(ErrorKind::format, "cell outside grid at rank " + std::to_string(i));
    }
    if (!ranks->emplace(cell_id(grid.g(), c), i).second) {
      throw Error(ErrorKind::duplicate, "cell listed twice at rank " + std::to_string(i));
    }
  }
  OrderOracle oracle(OrderKind::file, grid);
  oracle.rest_ = rest.value_or(OrderKind::rowmajor);
  oracle.listed_ = ranking.size();
  oracle.ranks_ = std::move(ranks);
  return oracle;
}

std::string OrderOracle::name() const {
  if (kind_ != OrderKind::file) return std::string(to_string(kind_));
  if (listed_ == grid_.cell_count()) return "file";
  return "file+" + std::string(to_string(rest_));
}

OrderKey OrderOracle::key(Cell c) const {
  if (c.ix >= grid_.side() || c.iy >= grid_.side()) {
    throw Error(ErrorKind::snap, "cell outside grid");
  }
  if (kind_ != OrderKind::file) return builtin_key(kind_, grid_.g(), c);
  auto it = ranks_->find(cell_id(grid_.g(), c));
  if (it != ranks_->end()) return it->second;
  return listed_ + builtin_key(rest_, grid_.g(), c);
}

std::vector<Point> sort_by_order(const OrderOracle& oracle, std::span<const Point> points) {
  std::vector<std::pair<OrderKey, Point>> keyed;
  keyed.reserve(points.size());
  for (Point p : points) keyed.emplace_back(oracle.curve_key(p), p);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < keyed.size(); ++i) {
    if (keyed[i].first == keyed[i - 1].first) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "two points share the cell of (" << keyed[i].second.x << ", " << keyed[i].second.y
          << ")";
      throw Error(ErrorKind::duplicate, msg.str());
    }
  }
  std::vector<Point> out;
  out.reserve(keyed.size());
  for (const auto& kp : keyed) out.push_back(kp.second);
  return out;
}

OrderOracle read_order(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<GridSpec> grid;
  std::vector<Cell> cells;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorKind::format, source + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (!grid) {
      if (first.rfind("g=", 0) != 0) fail("expected resolution header 'g=<int>'");
      int g = 0;
      try {
        g = std::stoi(first.substr(2));
      } catch (const std::exception&) {
        fail("bad resolution '" + first + "'");
      }
      if (g < 1 || g > 12) fail("order files support 1 <= g <= 12");
      grid.emplace(g);
      continue;
    }
    long long ix = 0;
    long long iy = 0;
    std::istringstream pair(line);
    std::string extra;
    if (!(pair >> ix >> iy) || (pair >> extra)) fail("expected 'ix iy'");
    if (ix < 0 || iy < 0 || ix >= grid->side() || iy >= grid->side()) fail("cell outside grid");
    Cell c{static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)};
    auto [it, inserted] = seen.emplace(cell_id(grid->g(), c), lineno);
    if (!inserted) {
      fail("duplicate cell (" + std::to_string(ix) + ", " + std::to_string(iy) +
           "), first listed on line " + std::to_string(it->second));
    }
    cells.push_back(c);
  }
  if (!grid) {
    lineno = 0;
    fail("empty order file");
  }
  if (cells.size() != grid->cell_count()) {
    fail("listed " + std::to_string(cells.size()) + " cells, expected " +
         std::to_string(grid->cell_count()));
  }
  return OrderOracle::ranked(*grid, cells);
}

OrderOracle load_order_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open order file " + path.string());
  return read_order(in, path.string());
}

void write_order(std::ostream& out, const OrderOracle& oracle) {
  const GridSpec& grid = oracle.grid();
  if (grid.g() > 12) throw Error(ErrorKind::enumeration, "order files support g <= 12");
  std::vector<std::pair<OrderKey, Cell>> all;
  all.reserve(grid.cell_count());
  for (std::uint32_t iy = 0; iy < grid.side(); ++iy) {
    for (std::uint32_t ix = 0; ix < grid.side(); ++ix) {
      all.emplace_back(oracle.key({ix, iy}), Cell{ix, iy});
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  out << "g=" << grid.g() << "\n# order " << oracle.name() << "\n";
  for (const auto& [key, c] : all) out << c.ix << ' ' << c.iy << '\n';
}

}  // namespace utsp
