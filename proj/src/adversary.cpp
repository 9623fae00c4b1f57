#include "utsp/adversary.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "utsp/error.hpp"

namespace utsp {

namespace {

std::string describe(const DyadicSquare& q) {
  return "square(t=" + std::to_string(q.t) + ", ix=" + std::to_string(q.ix) +
         ", iy=" + std::to_string(q.iy) + ")";
}

Point to_unit(const DyadicSquare& square, Point p) {
  Box b = square.box();
  double side = square.side();
  return {(p.x - b.x0) / side, (p.y - b.y0) / side};
}

double secant(int m) { return 1.0 / std::cos(2.0 * std::numbers::pi / m); }

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        // Keep the failure of the lowest index so errors are reproducible.
        std::lock_guard lock(failure_mutex);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t k = 0; k + 1 < workers; ++k) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<int> Params::scales() const {
  std::vector<int> out;
  for (int t = 0; t <= max_scale(); t += c) out.push_back(t);
  return out;
}

Params default_params(int r, int M, bool strict, int g) {
  if (M < 8 || M % 4 != 0) {
    throw Error(ErrorKind::parameter, "M must be a multiple of 4 and at least 8, got " +
                                          std::to_string(M));
  }
  if (r < 4) throw Error(ErrorKind::parameter, "r must be at least 4, got " + std::to_string(r));
  Params p;
  p.r = r;
  p.M = M;
  p.g = g;
  p.strict = strict;
  p.l = 1.0 / (100.0 * std::pow(static_cast<double>(M), 4));
  const double log_r = std::log(static_cast<double>(r));
  p.w = std::sqrt(4.0 * M * log_r / r);
  double c = 0.5 * std::log2(static_cast<double>(r)) + 0.5 * std::log2(static_cast<double>(M)) -
             std::log2(360.0);
  p.c = std::max(1, static_cast<int>(std::lround(c)));
  p.s = integer_cube_root(M);
  if (strict) {
    if (M <= 180 * 180) {
      throw Error(ErrorKind::constraint, "180^2 < M violated: M = " + std::to_string(M));
    }
    double upper = 1e-5 * std::pow(r / log_r, 1.0 / 9.0);
    if (M > upper) {
      std::ostringstream msg;
      msg << "M <= 1e-5 (r / log r)^(1/9) violated: M = " << M << ", bound = " << upper;
      throw Error(ErrorKind::constraint, msg.str());
    }
    if (!(p.w < p.l)) {
      std::ostringstream msg;
      msg << "w < l violated: w = " << p.w << ", l = " << p.l;
      throw Error(ErrorKind::constraint, msg.str());
    }
  } else if (p.w >= p.l) {
    p.w = p.l / 2.0;
    p.w_clamped = true;
  }
  return p;
}

int auto_resolution(const Params& params, int rmax) {
  const double need = std::ldexp(params.w, -rmax) / 4.0;
  for (int g = 1; g <= GridSpec::kMaxResolution; ++g) {
    if (std::ldexp(1.0, -g) <= need) return g;
  }
  return GridSpec::kMaxResolution;
}

Params fit_resolution(Params params, int rmax) {
  const double h = std::ldexp(1.0, -params.g);
  if (h <= std::ldexp(params.w, -rmax) / 4.0) return params;
  if (params.strict) {
    std::ostringstream msg;
    msg << "grid spacing 2^-" << params.g << " exceeds w 2^-" << rmax << " / 4 with w = "
        << params.w;
    throw Error(ErrorKind::resolution, msg.str());
  }
  params.w = 4.0 * h * std::ldexp(1.0, rmax);
  params.l = std::max(params.l, 2.0 * params.w);
  params.resolution_scaled = true;
  return params;
}

void validate_params(const Params& p) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::parameter, what); };
  if (p.M < 8 || p.M % 4 != 0) bad("M must be a multiple of 4 and at least 8");
  if (p.r < 0) bad("r must be non-negative");
  if (!(p.l > 0.0) || !std::isfinite(p.l)) bad("l must be positive");
  if (!(p.w > 0.0) || !std::isfinite(p.w)) bad("w must be positive");
  if (p.c < 1) bad("c must be at least 1");
  if (p.s < 1 || static_cast<long long>(p.s) * p.s * p.s > p.M) bad("s must satisfy s^3 <= M");
  if (p.g < 1 || p.g > GridSpec::kMaxResolution) bad("g must lie in [1, 30]");
  if (p.strict && !(p.w < p.l)) bad("strict mode needs w < l");
}

Ray radial_ray(Point center, AngleIndex j) { return Ray{center, j}; }

double point_ray_distance(Point q, const Ray& ray) {
  Point d = ray.angle.direction();
  double along = dot(q - ray.origin, d);
  if (along <= 0.0) return dist(q, ray.origin);
  return std::abs(cross(d, q - ray.origin));
}

std::pair<Point, Point> secant_observation_check(Point center, Point q, AngleIndex j) {
  if (j.count() < 8) {
    throw Error(ErrorKind::parameter, "secant observation needs M >= 8");
  }
  Point v = q - center;
  double rho = norm(v);
  if (rho <= kGeoTol) throw Error(ErrorKind::parameter, "q coincides with the center");
  // The perpendicular through q is {x : <x - center, u_j> = rho}; a ray point
  // center + t u_k meets it at t = rho / <u_k, u_j>.
  Point uj = j.direction();
  auto hit = [&](AngleIndex k) {
    Point uk = k.direction();
    double t = rho / dot(uk, uj);
    return center + t * uk;
  };
  return {hit(j.next()), hit(j.prev())};
}

std::string_view to_string(ChainEnd end) {
  switch (end) {
    case ChainEnd::completed: return "completed";
    case ChainEnd::exited_square: return "exited_square";
    case ChainEnd::backtrack_found: return "backtrack_found";
  }
  return "unknown";
}

std::vector<Point> SpiralChain::points() const {
  std::vector<Point> out;
  out.reserve(links.size());
  for (const auto& link : links) out.push_back(link.p);
  return out;
}

CycleWalk SpiralChain::walk() const {
  if (links.empty()) throw Error(ErrorKind::precondition, "empty chain has no walk");
  const int m = links.front().ray.count();
  std::vector<int> values;
  values.reserve(links.size());
  for (const auto& link : links) values.push_back(link.ray.index() % m);
  return CycleWalk(m, std::move(values));
}

std::vector<Cell> rect_cells(const GridSpec& grid, const OrientedRect& rect) {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = x0;
  double x1 = -x0;
  double y1 = -x0;
  for (Point c : rect.corners()) {
    x0 = std::min(x0, c.x);
    y0 = std::min(y0, c.y);
    x1 = std::max(x1, c.x);
    y1 = std::max(y1, c.y);
  }
  const double n = grid.side();
  auto lo = [&](double v) { return std::max(0.0, std::ceil(v * n - 0.5 - 1e-9)); };
  auto hi = [&](double v) { return std::min(n - 1.0, std::floor(v * n - 0.5 + 1e-9)); };
  double ix0 = lo(x0), ix1 = hi(x1), iy0 = lo(y0), iy1 = hi(y1);
  std::vector<Cell> out;
  if (ix1 < ix0 || iy1 < iy0) return out;
  if ((ix1 - ix0 + 1) * (iy1 - iy0 + 1) > static_cast<double>(std::size_t{1} << 26)) {
    throw Error(ErrorKind::enumeration, "rectangle covers too many grid cells");
  }
  for (auto iy = static_cast<std::uint32_t>(iy0); iy <= static_cast<std::uint32_t>(iy1); ++iy) {
    for (auto ix = static_cast<std::uint32_t>(ix0); ix <= static_cast<std::uint32_t>(ix1); ++ix) {
      Cell cell{ix, iy};
      if (rect_contains(rect, grid.center(cell))) out.push_back(cell);
    }
  }
  return out;
}

namespace {

struct Choice {
  Cell cell;
  bool first_rect;
};

// Decides the next chain point from the candidate cells of R1 and R2; an
// empty result ends the chain with a backtrack.
using Chooser = std::function<std::optional<Choice>(std::size_t step, Cell current,
                                                    const std::vector<Cell>& r1,
                                                    const std::vector<Cell>& r2)>;

SpiralChain chain_loop(const GridSpec& grid, const DyadicSquare& square, const Params& params,
                       const Chooser& choose) {
  validate_params(params);
  const int t = square.t;
  const double lt = params.length_at(t);
  const double wt = params.width_at(t);
  if (grid.spacing() > wt / 4.0) {
    std::ostringstream msg;
    msg << "grid spacing " << grid.spacing() << " exceeds w 2^-t / 4 = " << wt / 4.0 << " on "
        << describe(square);
    throw Error(ErrorKind::resolution, msg.str());
  }
  const double sec = secant(params.M);
  const Box box = square.box();

  SpiralChain chain;
  chain.square = square;
  AngleIndex ray(params.M, params.M);
  Point q = square.from_unit({0.75, 0.5});
  Cell cell = grid.snap_nearest(q);
  chain.links.push_back({grid.center(cell), q, ray});

  while (true) {
    const std::size_t i = chain.links.size();
    if (i >= params.cap()) {
      chain.end = ChainEnd::completed;
      return chain;
    }
    const ChainLink& cur = chain.links.back();
    Point qu = to_unit(square, cur.q);
    double rho = dist(qu, kSquareCenter) * sec;
    Point a = square.from_unit(kSquareCenter + rho * ray.next().direction());
    Point b = square.from_unit(kSquareCenter + rho * ray.prev().direction());
    Point c = cur.p + (a - cur.q);
    Point d = cur.p + (b - cur.q);
    AngleIndex along = ray.perpendicular();
    DiscreteLine line = DiscreteLine::through(along, cur.p);
    OrientedRect r1{c, along, lt, wt};
    OrientedRect r2{d, along, lt, wt};
    if (!rect_inside_box(r1, box) || !rect_inside_box(r2, box)) {
      chain.end = ChainEnd::exited_square;
      return chain;
    }
    std::vector<Cell> cells1 = rect_cells(grid, r1);
    std::vector<Cell> cells2 = rect_cells(grid, r2);
    if (cells1.empty() || cells2.empty()) {
      throw Error(ErrorKind::resolution, "rectangle holds no grid point at step " +
                                             std::to_string(i) + " on " + describe(square));
    }
    std::optional<Choice> pick = choose(i, cell, cells1, cells2);
    if (!pick) {
      chain.end = ChainEnd::backtrack_found;
      chain.backtrack = Backtrack{cur.p, line, Strip{line, wt}, r1, r2, square, t};
      return chain;
    }
    cell = pick->cell;
    ray = pick->first_rect ? ray.next() : ray.prev();
    chain.links.push_back({grid.center(cell), pick->first_rect ? a : b, ray});
  }
}

}  // namespace

SpiralChain spiral_chain(const OrderOracle& oracle, const DyadicSquare& square,
                         const Params& params) {
  auto choose = [&](std::size_t, Cell current, const std::vector<Cell>& r1,
                    const std::vector<Cell>& r2) -> std::optional<Choice> {
    const OrderKey limit = oracle.key(current);
    std::optional<Choice> best;
    OrderKey best_key = 0;
    for (int side = 0; side < 2; ++side) {
      for (const Cell& c : side == 0 ? r1 : r2) {
        OrderKey k = oracle.key(c);
        if (k < limit && (!best || k < best_key)) {
          best = Choice{c, side == 0};
          best_key = k;
        }
      }
    }
    return best;
  };
  return chain_loop(oracle.grid(), square, params, choose);
}

SpiralChain steered_chain(const GridSpec& grid, const DyadicSquare& square, const Params& params,
                          const std::function<int(std::size_t)>& side) {
  auto choose = [&](std::size_t step, Cell, const std::vector<Cell>& r1,
                    const std::vector<Cell>& r2) -> std::optional<Choice> {
    bool first = side(step) > 0;
    const auto& cells = first ? r1 : r2;
    double cx = 0.0;
    double cy = 0.0;
    for (const Cell& c : cells) {
      Point p = grid.center(c);
      cx += p.x;
      cy += p.y;
    }
    Point mid{cx / cells.size(), cy / cells.size()};
    const Cell* best = &cells.front();
    for (const Cell& c : cells) {
      if (dist(grid.center(c), mid) < dist(grid.center(*best), mid)) best = &c;
    }
    return Choice{*best, first};
  };
  return chain_loop(grid, square, params, choose);
}

OrderOracle spiral_friendly_oracle(const GridSpec& grid, const SpiralChain& chain,
                                   OrderKind rest) {
  std::vector<Cell> ranking;
  ranking.reserve(chain.size());
  for (auto it = chain.links.rbegin(); it != chain.links.rend(); ++it) {
    ranking.push_back(grid.require_cell(it->p));
  }
  return OrderOracle::ranked(grid, ranking, rest);
}

std::optional<std::string> check_chain_laws(const OrderOracle& oracle, const SpiralChain& chain,
                                            const Params& params, double tol) {
  const double sec = secant(params.M);
  const double l = params.l;
  auto fail = [](std::size_t i, const std::string& what) {
    return std::optional<std::string>("step " + std::to_string(i) + ": " + what);
  };
  auto ray_dist = [&](Point pu, AngleIndex j) {
    return point_ray_distance(pu, radial_ray(kSquareCenter, j));
  };
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const std::size_t i = k + 1;
    const ChainLink& link = chain.links[k];
    Point pu = to_unit(chain.square, link.p);
    Point qu = to_unit(chain.square, link.q);
    const double radius = 0.25 * std::pow(sec, static_cast<double>(i - 1));
    const double slack = 2.0 * static_cast<double>(i) * l;
    if (link.ray.count() != params.M) return fail(i, "ray index uses the wrong M");
    if (k > 0 && !(oracle.key(oracle.grid().require_cell(link.p)) <
                   oracle.key(oracle.grid().require_cell(chain.links[k - 1].p)))) {
      return fail(i, "order does not decrease");
    }
    if (ray_dist(qu, link.ray) > tol) return fail(i, "anchor q is off its ray");
    if (std::abs(dist(qu, kSquareCenter) - radius) > tol) {
      return fail(i, "anchor radius differs from (1/4) sec^(i-1)");
    }
    if (dist(pu, qu) > slack + tol) return fail(i, "|p - q| exceeds 2il");
    if (std::abs(dist(pu, kSquareCenter) - radius) > slack + tol) {
      return fail(i, "radius law violated");
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= params.M; ++j) nearest = std::min(nearest, ray_dist(pu, AngleIndex(j, params.M)));
    if (nearest > slack + tol) return fail(i, "point is not within 2il of any ray");
    if (k + 1 < chain.size()) {
      const ChainLink& next = chain.links[k + 1];
      if (next.ray != link.ray.next() && next.ray != link.ray.prev()) {
        return fail(i, "next ray index is not adjacent");
      }
      if (ray_dist(pu, link.ray) <= slack) {
        Point nu = to_unit(chain.square, next.p);
        double d = std::min(ray_dist(nu, link.ray.next()), ray_dist(nu, link.ray.prev()));
        if (d > 2.0 * static_cast<double>(i + 1) * l + tol) {
          return fail(i, "next point is not near an adjacent ray");
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<std::string> verify_backtrack(const OrderOracle& oracle, const Backtrack& bt,
                                            const Params& params) {
  const GridSpec& grid = oracle.grid();
  const int t = bt.square.t;
  const double lt = params.length_at(t);
  const double wt = params.width_at(t);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); };
  if (bt.scale != t) return "scale differs from the square's scale";
  if (!bt.square.contains(bt.p)) return "p lies outside the square";
  if (!(point_line_distance(bt.p, bt.line) < wt)) return "p is not within w of L";
  if (!close(bt.strip.halfwidth, wt)) return "strip width is not w 2^-t";
  for (const OrientedRect* r : {&bt.r1, &bt.r2}) {
    if (!close(r->length, lt) || !close(r->width, wt)) return "rectangle size is not scaled";
    if (!(r->angle == bt.line.angle())) return "rectangle is not parallel to L";
    if (std::abs(bt.line.signed_distance(r->center)) > kGeoTol) return "rectangle off L";
    if (!rect_inside_box(*r, bt.square.box())) return "rectangle leaves the square";
  }
  Point dir = bt.line.direction();
  double s1 = dot(bt.r1.center - bt.p, dir);
  double s2 = dot(bt.r2.center - bt.p, dir);
  if (!(s1 * s2 < 0.0)) return "rectangles are not on opposite sides of p";
  const OrderKey pk = oracle.key(grid.require_cell(bt.p));
  for (const OrientedRect* r : {&bt.r1, &bt.r2}) {
    std::vector<Cell> cells = rect_cells(grid, *r);
    if (cells.empty()) return "rectangle holds no grid point";
    for (const Cell& c : cells) {
      if (!(oracle.key(c) > pk)) return "a grid point of R1 or R2 precedes p";
    }
  }
  return std::nullopt;
}

std::optional<Backtrack> find_backtrack(const OrderOracle& oracle, const DyadicSquare& square,
                                        const Params& params) {
  SpiralChain chain = spiral_chain(oracle, square, params);
  if (chain.end != ChainEnd::backtrack_found) return std::nullopt;
  if (auto why = verify_backtrack(oracle, *chain.backtrack, params)) {
    throw Error(ErrorKind::construction, "backtrack on " + describe(square) + " failed: " + *why);
  }
  return chain.backtrack;
}

std::size_t BacktrackAtlas::covered() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const AtlasEntry& e) { return e.backtrack.has_value(); }));
}

const AtlasEntry* BacktrackAtlas::first_uncovered() const {
  for (const auto& e : entries) {
    if (!e.backtrack) return &e;
  }
  return nullptr;
}

BacktrackAtlas build_atlas(const OrderOracle& oracle, const Params& params,
                           const std::vector<int>& scales, std::size_t budget) {
  BacktrackAtlas atlas;
  atlas.scales = scales;
  std::size_t total = 0;
  for (int t : scales) {
    if (t < 0 || t > 30) throw Error(ErrorKind::parameter, "scale out of range");
    total += std::size_t{1} << (2 * t);
    if (total > budget) {
      throw Error(ErrorKind::enumeration, "atlas needs more than " + std::to_string(budget) +
                                              " squares");
    }
  }
  atlas.entries.reserve(total);
  for (int t : scales) {
    for_each_dyadic_square(t, [&](const DyadicSquare& q) {
      AtlasEntry entry;
      entry.square = q;
      atlas.entries.push_back(std::move(entry));
    });
  }
  parallel_for(atlas.entries.size(), [&](std::size_t k) {
    AtlasEntry& e = atlas.entries[k];
    SpiralChain chain = spiral_chain(oracle, e.square, params);
    e.end = chain.end;
    e.chain_length = chain.size();
    if (chain.end == ChainEnd::backtrack_found) {
      if (auto why = verify_backtrack(oracle, *chain.backtrack, params)) {
        throw Error(ErrorKind::construction,
                    "backtrack on " + describe(e.square) + " failed: " + *why);
      }
      e.backtrack = chain.backtrack;
    } else {
      e.chain = std::move(chain);
    }
  });
  return atlas;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t line_seed(std::uint64_t seed, std::size_t i) { return splitmix64(seed + i); }

LineSample sample_line(int M, std::uint64_t seed) {
  if (M < 1) throw Error(ErrorKind::parameter, "M must be positive");
  std::mt19937_64 rng(seed);
  // Modulo bias is below M / 2^64.
  long long j = 1 + static_cast<long long>(rng() % static_cast<std::uint64_t>(M));
  AngleIndex angle(j, M);
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double half = admissible_offset(angle);
  return LineSample{DiscreteLine(angle, (2.0 * u - 1.0) * half), seed};
}

bool passes_through(const LineSample& line, const Backtrack& bt, const Params& params) {
  auto a = clip_line_to_square(line.line, bt.square);
  auto b = clip_line_to_square(bt.line, bt.square);
  if (!a || !b) return false;
  return segment_hausdorff_within(*a, *b, 0.5 * params.width_at(bt.square.t));
}

BacktrackingSet backtracking_set(const OrderOracle& oracle, const BacktrackAtlas& atlas,
                                 const LineSample& line, const Params& params,
                                 bool allow_partial) {
  BacktrackingSet set;
  set.line = line;
  set.scales = atlas.scales;
  set.bad.resize(atlas.scales.size());
  const GridSpec& grid = oracle.grid();
  std::unordered_set<std::uint64_t> seen;
  for (const AtlasEntry& e : atlas.entries) {
    if (!e.backtrack) {
      if (allow_partial) continue;
      throw Error(ErrorKind::coverage,
                  describe(e.square) + " has no backtrack; this square belongs to CASE B");
    }
    if (!passes_through(line, *e.backtrack, params)) continue;
    auto slot = std::find(atlas.scales.begin(), atlas.scales.end(), e.square.t);
    set.bad[static_cast<std::size_t>(slot - atlas.scales.begin())].push_back(e.square);
    set.sigma += e.square.side();
    Cell cell = grid.require_cell(e.backtrack->p);
    if (seen.insert(rowmajor_key(grid.g(), cell)).second) set.points.push_back(e.backtrack->p);
  }
  set.detour_bound_rhs = std::sqrt(2.0) + 4.0 * params.w * set.sigma;
  double rhs = 0.0;
  for (std::size_t k = 0; k < set.scales.size(); ++k) {
    double mass = 0.0;
    for (const auto& q : set.bad[k]) mass += q.side();
    rhs += mass - 18.0 / std::ldexp(1.0, params.c);
  }
  set.charging_bound_rhs = params.l * rhs;
  if (!set.points.empty()) {
    set.cost_order = cost_under_order(oracle, set.points);
    // Walk along L, leaving it once per point: sort by the projection.
    Point dir = line.line.direction();
    set.detour_tour = set.points;
    std::sort(set.detour_tour.begin(), set.detour_tour.end(), [&](Point a, Point b) {
      double pa = dot(a, dir);
      double pb = dot(b, dir);
      if (pa != pb) return pa < pb;
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    set.detour_length = tsp_upper_tour(set.points, set.detour_tour);
  }
  set.charging_bound_lhs = 2.0 * set.cost_order + 1.0;
  return set;
}

SigmaEstimate estimate_sigma_expectation(const BacktrackAtlas& atlas, const Params& params,
                                         std::size_t samples, std::uint64_t seed) {
  SigmaEstimate est;
  est.samples = samples;
  for (const auto& e : atlas.entries) {
    if (!e.backtrack) continue;
    double side = e.square.side();
    est.prediction += side * (params.w * side / (2.0 * params.M));
  }
  if (samples == 0) return est;
  std::vector<double> values(samples, 0.0);
  parallel_for(samples, [&](std::size_t i) {
    LineSample line = sample_line(params.M, line_seed(seed, i));
    double sigma = 0.0;
    for (const auto& e : atlas.entries) {
      if (e.backtrack && passes_through(line, *e.backtrack, params)) sigma += e.square.side();
    }
    values[i] = sigma;
  });
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / static_cast<double>(samples);
  if (samples > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.stderr_mean = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));
  }
  return est;
}

std::size_t min_zigzag_chain(const Params& params) {
  return 7 * static_cast<std::size_t>(params.s) * params.s * params.s;
}

namespace {

// Sort key placing points by their distance to the square's center.
double radius_in(const DyadicSquare& square, Point p) {
  return dist(to_unit(square, p), kSquareCenter);
}

}  // namespace

ZigZagSet zigzag_set(const OrderOracle& oracle, const SpiralChain& chain, const Params& params) {
  const std::size_t full = static_cast<std::size_t>(params.M) * static_cast<std::size_t>(params.M);
  const bool complete = chain.end == ChainEnd::completed && chain.size() >= full;
  if (params.strict && !complete) {
    throw Error(ErrorKind::precondition, "strict mode needs a completed chain of M^2 points, got " +
                                             std::to_string(chain.size()));
  }
  if (chain.end == ChainEnd::backtrack_found) {
    throw Error(ErrorKind::precondition, "chain ended at a backtrack");
  }
  if (chain.size() < min_zigzag_chain(params)) {
    throw Error(ErrorKind::precondition, "chain of " + std::to_string(chain.size()) +
                                             " points is shorter than 7 s^3 = " +
                                             std::to_string(min_zigzag_chain(params)));
  }
  ZigZagSet out;
  out.s = params.s;
  out.chain_length = chain.size();
  out.truncated = !complete;
  const int m = params.M;
  const int s = params.s;
  CycleWalk walk = chain.walk();
  out.outcome = dichotomy(walk, s);

  const double side = chain.square.side();
  out.min_step = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < chain.size(); ++k) {
    out.min_step = std::min(out.min_step, dist(chain.links[k - 1].p, chain.links[k].p) / side);
  }
  out.min_step_bound = 0.1 / m;

  auto rad = [&](Point p) { return radius_in(chain.square, p); };
  auto by_radius = [&](bool ascending) {
    return [&, ascending](Point a, Point b) { return ascending ? rad(a) < rad(b) : rad(a) > rad(b); };
  };

  if (const auto* z = std::get_if<ZigZag>(&out.outcome)) {
    std::size_t keep = std::min(z->m(), static_cast<std::size_t>(m / s));
    std::vector<Point> centre_ray;
    std::vector<Point> plus_ray;
    std::vector<Point> minus_ray;
    const int up = (z->a + s * s) % m;
    for (std::size_t mu = 0; mu < keep; ++mu) {
      Point pi = chain.links[z->i[mu]].p;
      Point pj = chain.links[z->j[mu]].p;
      out.points.push_back(pi);
      out.points.push_back(pj);
      centre_ray.push_back(pi);
      (walk[z->j[mu]] == up ? plus_ray : minus_ray).push_back(pj);
    }
    // In along one outer ray, out along ray a, in along the other outer ray.
    std::sort(plus_ray.begin(), plus_ray.end(), by_radius(false));
    std::sort(centre_ray.begin(), centre_ray.end(), by_radius(true));
    std::sort(minus_ray.begin(), minus_ray.end(), by_radius(false));
    out.tour = plus_ray;
    out.tour.insert(out.tour.end(), centre_ray.begin(), centre_ray.end());
    out.tour.insert(out.tour.end(), minus_ray.begin(), minus_ray.end());
  } else {
    const auto& c = std::get<Confined>(out.outcome);
    std::vector<std::vector<Point>> groups(3);
    for (std::size_t t : c.visits) {
      if (t + 1 >= chain.size()) continue;
      out.points.push_back(chain.links[t].p);
      out.points.push_back(chain.links[t + 1].p);
      groups[1].push_back(chain.links[t].p);
      int next = walk[t + 1];
      groups[next == (c.a + 1) % m ? 2 : 0].push_back(chain.links[t + 1].p);
    }
    // Sweep the three neighbouring rays, alternating direction.
    std::sort(groups[0].begin(), groups[0].end(), by_radius(true));
    std::sort(groups[1].begin(), groups[1].end(), by_radius(false));
    std::sort(groups[2].begin(), groups[2].end(), by_radius(true));
    for (const auto& g : groups) out.tour.insert(out.tour.end(), g.begin(), g.end());
    const double mm = static_cast<double>(m) * m;
    out.confined_tour_bound = std::pow(static_cast<double>(s), 3) / mm + (s / 7.0) / mm;
  }
  if (out.points.empty()) {
    throw Error(ErrorKind::construction, "zig-zag witness produced an empty set");
  }
  out.report = measure_order_ratio(oracle, out.points);
  out.tour_length = tsp_upper_tour(out.points, out.tour);
  double upper = std::min(out.report.tsp_upper, out.tour_length);
  if (out.report.tsp_exact) upper = std::max(upper, *out.report.tsp_exact);
  out.certified_ratio = upper > 0.0 ? out.report.cost_order / upper : 0.0;
  return out;
}

std::string_view to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::a: return "A";
    case CaseKind::a_partial: return "A-partial";
    case CaseKind::b_zigzag: return "B-zigzag";
    case CaseKind::b_confined: return "B-confined";
    case CaseKind::inconclusive: return "inconclusive";
  }
  return "unknown";
}

CaseReport run_case_dichotomy(const OrderOracle& oracle, const Params& params,
                              const CaseOptions& options) {
  validate_params(params);
  if (oracle.grid().g() != params.g) {
    throw Error(ErrorKind::parameter, "oracle grid g=" + std::to_string(oracle.grid().g()) +
                                          " differs from params g=" + std::to_string(params.g));
  }
  CaseReport report;
  report.params = params;
  report.scales = options.scales.empty() ? params.scales() : options.scales;
  report.atlas = build_atlas(oracle, params, report.scales);
  const BacktrackAtlas& atlas = report.atlas;
  report.squares = atlas.entries.size();
  report.covered = atlas.covered();

  for (const auto& e : atlas.entries) {
    if (e.backtrack || !e.chain) continue;
    if (e.chain->size() < min_zigzag_chain(params)) continue;
    if (params.strict && e.chain->end != ChainEnd::completed) continue;
    ZigZagSet z = zigzag_set(oracle, *e.chain, params);
    report.kind = std::holds_alternative<ZigZag>(z.outcome) ? CaseKind::b_zigzag
                                                             : CaseKind::b_confined;
    report.case_b_square = e.square;
    report.set = z.points;
    report.report = z.report;
    report.zigzag = std::move(z);
    return report;
  }

  if (report.covered == 0) return report;
  report.kind = atlas.full_coverage() ? CaseKind::a : CaseKind::a_partial;
  report.lines = options.lines;

  struct LineResult {
    BacktrackingSet set;
    double score = -1.0;
  };
  std::vector<LineResult> results(options.lines);
  parallel_for(options.lines, [&](std::size_t i) {
    LineSample line = sample_line(params.M, line_seed(options.seed, i));
    LineResult& r = results[i];
    r.set = backtracking_set(oracle, atlas, line, params, true);
    if (r.set.points.size() >= 2) {
      double upper = tsp_upper_heuristic(r.set.points);
      if (upper > 0.0) r.score = r.set.cost_order / upper;
    }
  });
  report.min_detour_bound_slack = std::numeric_limits<double>::infinity();
  report.min_charging_bound_slack = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& set = results[i].set;
    report.min_detour_bound_slack = std::min(report.min_detour_bound_slack, set.detour_bound_slack());
    report.min_charging_bound_slack = std::min(report.min_charging_bound_slack, set.charging_bound_slack());
    if (set.detour_bound_slack() < -1e-9) ++report.detour_bound_violations;
    if (set.charging_bound_slack() < -1e-9) ++report.charging_bound_violations;
    if (results[i].score > results[best].score) best = i;
  }
  if (!results.empty()) {
    report.best = std::move(results[best].set);
    report.set = report.best->points;
    if (!report.set.empty()) report.report = measure_order_ratio(oracle, report.set);
  }
  return report;
}

std::optional<std::string> verify_report(const OrderOracle& oracle, const CaseReport& report) {
  const Params& params = report.params;
  for (const auto& e : report.atlas.entries) {
    if (e.backtrack) {
      if (auto why = verify_backtrack(oracle, *e.backtrack, params)) {
        return describe(e.square) + ": " + *why;
      }
    } else if (e.chain) {
      if (auto why = check_chain_laws(oracle, *e.chain, params)) {
        return describe(e.square) + ": " + *why;
      }
    }
  }
  if (report.zigzag && report.case_b_square) {
    for (const auto& e : report.atlas.entries) {
      if (!(e.square == *report.case_b_square) || !e.chain) continue;
      if (auto why = check_outcome(e.chain->walk(), params.s, report.zigzag->outcome)) {
        return "walk witness: " + *why;
      }
    }
  }
  return std::nullopt;
}

}  // namespace utsp
