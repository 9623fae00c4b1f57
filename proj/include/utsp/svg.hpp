#pragma once

#include <string>
#include <utility>
#include <vector>

#include "utsp/geometry.hpp"

namespace utsp {

/// Points of the unit square with an optional polyline through them in the
/// given order.
std::string render_points_svg(const std::vector<Point>& points, const std::vector<Point>& path,
                              const std::string& title);

/// One marker per chain point, the M radial rays of `square` and the chain
/// path.
std::string render_chain_svg(const std::vector<Point>& points, const Box& square, int M,
                             const std::string& title);

/// Ratio against n on a log2 n axis, with the reference curve log2 n.
std::string render_ratio_svg(const std::vector<std::pair<double, double>>& n_ratio,
                             const std::string& title);

}  // namespace utsp
