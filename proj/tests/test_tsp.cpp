#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "utsp/error.hpp"
#include "utsp/tsp.hpp"

using namespace utsp;

namespace {

double brute_force_path(std::vector<Point> pts) {
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  double best = 1e300;
  do {
    double len = 0.0;
    for (std::size_t i = 1; i < idx.size(); ++i) len += dist(pts[idx[i - 1]], pts[idx[i]]);
    best = std::min(best, len);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

// Minimum over all spanning trees, by enumerating (n-1)-edge subsets.
double brute_force_mst(const std::vector<Point>& pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) edges.push_back({a, b});
  }
  const int e = static_cast<int>(edges.size());
  double best = 1e300;
  int trees = 0;
  for (int mask = 0; mask < (1 << e); ++mask) {
    if (__builtin_popcount(mask) != n - 1) continue;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    bool acyclic = true;
    double w = 0.0;
    for (int k = 0; k < e; ++k) {
      if (!(mask >> k & 1)) continue;
      int ra = find(edges[k].first);
      int rb = find(edges[k].second);
      if (ra == rb) acyclic = false;
      parent[ra] = rb;
      w += dist(pts[edges[k].first], pts[edges[k].second]);
    }
    if (acyclic) {
      ++trees;
      best = std::min(best, w);
    }
  }
  CHECK(trees == static_cast<int>(std::pow(n, n - 2)));
  return best;
}

std::vector<Point> random_set(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

const std::vector<Point> kCorners{{0, 0}, {1, 0}, {1, 1}, {0, 1}};

}  // namespace

TEST_CASE("cost under an order") {
  GridSpec grid(1);
  auto rm = OrderOracle::curve(OrderKind::rowmajor, grid);
  std::vector<Point> one{grid.center({1, 1})};
  CHECK(cost_under_order(rm, one) == 0.0);

  // Order visiting left, right, middle.
  GridSpec g2(2);
  std::vector<Cell> rank{{0, 1}, {3, 1}, {1, 1}};
  auto o = OrderOracle::ranked(g2, rank, OrderKind::rowmajor);
  std::vector<Point> pts{g2.center({1, 1}), g2.center({0, 1}), g2.center({3, 1})};
  CHECK(cost_under_order(o, pts) == doctest::Approx(0.75 + 0.5));
}

TEST_CASE("exact path tsp") {
  CHECK(tsp_exact_path(std::vector<Point>{{0.1, 0.1}, {0.4, 0.5}}) == doctest::Approx(0.5));
  CHECK(tsp_exact_path(kCorners) == doctest::Approx(brute_force_path(kCorners)));
  CHECK(tsp_exact_path(kCorners) == doctest::Approx(3.0));
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(tsp_exact_path(random_set(rng, 17)), Error);
}

TEST_CASE("exact path tsp agrees with brute force") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_set(rng, 1 + trial % 8);
    CHECK(std::abs(tsp_exact_path(pts) - brute_force_path(pts)) < 1e-9);
  }
}

TEST_CASE("spanning tree lower bound") {
  CHECK(tsp_lower_mst(std::vector<Point>{{0.1, 0.1}, {0.4, 0.5}}) == doctest::Approx(0.5));
  CHECK(tsp_lower_mst(kCorners) == doctest::Approx(brute_force_mst(kCorners)));
  CHECK(tsp_lower_mst(kCorners) == doctest::Approx(3.0));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto pts = random_set(rng, 5);
    CHECK(std::abs(tsp_lower_mst(pts) - brute_force_mst(pts)) < 1e-12);
  }
}

TEST_CASE("upper bounds and explicit tours") {
  CHECK(tsp_upper_heuristic(std::vector<Point>{{0.1, 0.1}, {0.4, 0.5}}) == doctest::Approx(0.5));
  std::vector<Point> two{{0.1, 0.1}, {0.4, 0.5}};
  CHECK(tsp_upper_tour(two, two) == doctest::Approx(0.5));

  std::vector<Point> line{{0.1, 0.5}, {0.3, 0.5}, {0.35, 0.5}, {0.9, 0.5}};
  CHECK(tsp_upper_tour(line, line) == doctest::Approx(0.8));
  std::vector<Point> wrong{{0.1, 0.5}, {0.3, 0.5}, {0.35, 0.5}};
  CHECK_THROWS_AS(tsp_upper_tour(line, wrong), Error);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = random_set(rng, 2 + trial % 7);
    auto perm = pts;
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(tsp_upper_tour(pts, perm) >= tsp_exact_path(pts) - 1e-12);
  }
}

TEST_CASE("heuristic path does not depend on input order") {
  std::mt19937_64 rng(12);
  auto pts = random_set(rng, 40);
  auto a = heuristic_path(pts);
  std::shuffle(pts.begin(), pts.end(), rng);
  CHECK(heuristic_path(pts) == a);
}

TEST_CASE("sandwich on random sets") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto pts = random_set(rng, 1 + trial % 12);
    double lo = tsp_lower_mst(pts);
    double ex = tsp_exact_path(pts);
    double hi = tsp_upper_heuristic(pts);
    CHECK(lo <= ex + 1e-9);
    CHECK(ex <= hi + 1e-9);
  }
}

TEST_CASE("ratio reports") {
  GridSpec grid(4);
  auto o = OrderOracle::curve(OrderKind::hilbert, grid);
  std::vector<Point> one{grid.center({3, 3})};
  auto r1 = measure_order_ratio(o, one);
  CHECK_FALSE(r1.ratio_defined);
  CHECK(r1.ratio_lower == 0.0);

  for (OrderKind kind : {OrderKind::sierpinski, OrderKind::zorder, OrderKind::rowmajor}) {
    auto oracle = OrderOracle::curve(kind, grid);
    std::vector<Point> two{grid.center({1, 9}), grid.center({12, 2})};
    auto r = measure_order_ratio(oracle, two);
    REQUIRE(r.ratio_exact);
    CHECK(*r.ratio_exact == doctest::Approx(1.0));
  }

  std::mt19937_64 rng(6);
  std::vector<Point> pts;
  for (int i = 0; i < 10; ++i) {
    Point p = grid.center({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(rng() % 16)});
    pts.push_back(p);
  }
  auto r = measure_order_ratio(o, pts);
  REQUIRE(r.tsp_exact);
  CHECK(r.tsp_lower <= *r.tsp_exact + 1e-12);
  CHECK(*r.tsp_exact <= r.tsp_upper + 1e-12);
  CHECK(r.cost_order >= *r.tsp_exact - 1e-12);
  CHECK(r.ratio_lower <= *r.ratio_exact + 1e-12);
}
