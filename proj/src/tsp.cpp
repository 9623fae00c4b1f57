#include "utsp/tsp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "utsp/error.hpp"

namespace utsp {

namespace {

bool lex_less(const Point& a, const Point& b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

// Canonical input order so results never depend on how a set was listed.
std::vector<Point> canonical(std::span<const Point> points) {
  std::vector<Point> out(points.begin(), points.end());
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

}  // namespace

double path_length(std::span<const Point> path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += dist(path[i - 1], path[i]);
  return total;
}

double cost_under_order(const OrderOracle& oracle, std::span<const Point> points) {
  if (points.empty()) throw Error(ErrorKind::parameter, "cost of an empty set");
  std::vector<Point> sorted = sort_by_order(oracle, points);
  return path_length(sorted);
}

double tsp_exact_path(std::span<const Point> input) {
  const std::size_t n = input.size();
  if (n == 0) throw Error(ErrorKind::parameter, "tsp of an empty set");
  if (n > kExactTspLimit) {
    throw Error(ErrorKind::size, "exact tsp supports at most " + std::to_string(kExactTspLimit) +
                                     " points, got " + std::to_string(n));
  }
  if (n == 1) return 0.0;
  std::vector<Point> pts = canonical(input);
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = dist(pts[i], pts[j]);
  }
  const std::size_t full = (std::size_t{1} << n) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  // best[mask * n + v]: shortest path visiting exactly `mask`, ending at v.
  std::vector<double> best((full + 1) * n, inf);
  for (std::size_t v = 0; v < n; ++v) best[(std::size_t{1} << v) * n + v] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    for (std::size_t v = 0; v < n; ++v) {
      double here = best[mask * n + v];
      if (here == inf) continue;
      for (std::size_t u = 0; u < n; ++u) {
        if (mask & (std::size_t{1} << u)) continue;
        std::size_t next = mask | (std::size_t{1} << u);
        double cand = here + d[v * n + u];
        if (cand < best[next * n + u]) best[next * n + u] = cand;
      }
    }
  }
  double out = inf;
  for (std::size_t v = 0; v < n; ++v) out = std::min(out, best[full * n + v]);
  return out;
}

double tsp_lower_mst(std::span<const Point> input) {
  const std::size_t n = input.size();
  if (n <= 1) return 0.0;
  std::vector<Point> pts = canonical(input);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> reach(n, inf);
  std::vector<bool> in_tree(n, false);
  reach[0] = 0.0;
  double total = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (pick == n || reach[v] < reach[pick])) pick = v;
    }
    in_tree[pick] = true;
    total += reach[pick];
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v]) reach[v] = std::min(reach[v], dist(pts[pick], pts[v]));
    }
  }
  return total;
}

std::vector<Point> heuristic_path(std::span<const Point> input) {
  const std::size_t n = input.size();
  std::vector<Point> pts = canonical(input);
  if (n <= 2) return pts;

  // Nearest neighbour from the westmost point (pts[0] after canonical sort).
  std::vector<Point> path;
  path.reserve(n);
  std::vector<bool> used(n, false);
  std::size_t cur = 0;
  used[0] = true;
  path.push_back(pts[0]);
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < n; ++v) {
      if (used[v]) continue;
      double dv = dist(pts[cur], pts[v]);
      if (dv < best) {
        best = dv;
        pick = v;
      }
    }
    used[pick] = true;
    path.push_back(pts[pick]);
    cur = pick;
  }

  // Open-path 2-opt: reversing path[i..j] swaps edges (i-1,i) and (j,j+1);
  // a missing edge at either end of the path contributes nothing.
  constexpr double kImprove = 1e-12;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        double before = 0.0;
        double after = 0.0;
        if (i > 0) {
          before += dist(path[i - 1], path[i]);
          after += dist(path[i - 1], path[j]);
        }
        if (j + 1 < n) {
          before += dist(path[j], path[j + 1]);
          after += dist(path[i], path[j + 1]);
        }
        if (after < before - kImprove) {
          std::reverse(path.begin() + static_cast<std::ptrdiff_t>(i),
                       path.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
  }
  return path;
}

double tsp_upper_heuristic(std::span<const Point> points) {
  if (points.empty()) throw Error(ErrorKind::parameter, "tsp of an empty set");
  std::vector<Point> path = heuristic_path(points);
  return path_length(path);
}

double tsp_upper_tour(std::span<const Point> points, std::span<const Point> path) {
  std::vector<Point> a = canonical(points);
  std::vector<Point> b = canonical(path);
  if (a != b) {
    std::ostringstream msg;
    msg << "path of " << path.size() << " points is not a permutation of the " << points.size()
        << "-point set";
    throw Error(ErrorKind::witness, msg.str());
  }
  return path_length(path);
}

RatioReport measure_order_ratio(const OrderOracle& oracle, std::span<const Point> points) {
  RatioReport report;
  report.n = points.size();
  report.cost_order = cost_under_order(oracle, points);
  report.tsp_lower = tsp_lower_mst(points);
  report.tsp_upper = tsp_upper_heuristic(points);
  if (points.size() <= kExactTspLimit) {
    report.tsp_exact = tsp_exact_path(points);
    // The heuristic tour can never beat the optimum; snap away last-bit noise.
    report.tsp_upper = std::max(report.tsp_upper, *report.tsp_exact);
  }
  report.ratio_defined = report.tsp_upper > 0.0;
  if (report.ratio_defined) {
    report.ratio_lower = report.cost_order / report.tsp_upper;
    if (report.tsp_exact && *report.tsp_exact > 0.0) {
      report.ratio_exact = report.cost_order / *report.tsp_exact;
    }
  }
  return report;
}

}  // namespace utsp
