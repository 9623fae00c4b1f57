#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "utsp/geometry.hpp"
#include "utsp/orders.hpp"

namespace utsp {

/// Largest set for which the exact path TSP is computed.
inline constexpr std::size_t kExactTspLimit = 16;

/// Competitive-ratio measurement of one set under one order. All TSP values
/// are open-path (free endpoints).
struct RatioReport {
  std::size_t n = 0;
  double cost_order = 0.0;
  std::optional<double> tsp_exact;
  double tsp_lower = 0.0;
  double tsp_upper = 0.0;
  /// cost_order / tsp_upper; a sound lower bound on the true ratio.
  double ratio_lower = 0.0;
  std::optional<double> ratio_exact;
  /// False for sets whose TSP length is zero (n <= 1).
  bool ratio_defined = false;
};

double path_length(std::span<const Point> path);

double cost_under_order(const OrderOracle& oracle, std::span<const Point> points);

/// Held-Karp over (subset, endpoint) states. Accepts 1 <= n <= kExactTspLimit.
double tsp_exact_path(std::span<const Point> points);

/// Minimum spanning tree weight (Prim, O(n^2)).
double tsp_lower_mst(std::span<const Point> points);

/// Nearest neighbour from the westmost point, then open-path 2-opt to a local
/// optimum. Deterministic for a given set regardless of input order.
std::vector<Point> heuristic_path(std::span<const Point> points);
double tsp_upper_heuristic(std::span<const Point> points);

/// Length of an explicit path; throws a witness error unless `path` is a
/// permutation of `points`.
double tsp_upper_tour(std::span<const Point> points, std::span<const Point> path);

RatioReport measure_order_ratio(const OrderOracle& oracle, std::span<const Point> points);

}  // namespace utsp
