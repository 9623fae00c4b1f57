#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "utsp/cyclewalk.hpp"
#include "utsp/geometry.hpp"
#include "utsp/orders.hpp"
#include "utsp/tsp.hpp"

namespace utsp {

/// Construction parameters. Lengths l and w are for the unit square; a square
/// of scale t uses l * 2^-t and w * 2^-t.
struct Params {
  int r = 4;
  int M = 16;
  double l = 0.0;
  double w = 0.0;
  int c = 1;
  int s = 2;
  int g = 12;
  bool strict = false;
  /// w came out >= l and was clamped to l / 2.
  bool w_clamped = false;
  /// l and w were enlarged so that rectangles hold enough grid points.
  bool resolution_scaled = false;
  /// Maximum chain length; 0 means M^2.
  std::size_t chain_cap = 0;

  double length_at(int t) const { return std::ldexp(l, -t); }
  double width_at(int t) const { return std::ldexp(w, -t); }
  std::size_t cap() const {
    return chain_cap ? chain_cap : static_cast<std::size_t>(M) * static_cast<std::size_t>(M);
  }
  /// Deepest scale used: c * floor(r / c).
  int max_scale() const { return c * (r / c); }
  /// The scales 0, c, 2c, ..., c * floor(r / c).
  std::vector<int> scales() const;
};

/// Formula parameters for r scales and M angles at grid resolution `g`.
/// l = 1 / (100 M^4), w = sqrt(4 M ln r / r), c = max(1, round(log2 r / 2 +
/// log2 M / 2 - log2 360)), s = floor(M^(1/3)). Strict mode enforces
/// 180^2 < M <= 1e-5 (r / ln r)^(1/9) and w < l; desk mode clamps w to l / 2.
Params default_params(int r, int M, bool strict, int g = 12);

/// Checks the grid resolution: the spacing 2^-g must be at most
/// w * 2^-rmax / 4. Desk mode enlarges l and w (w = 4 * 2^-g * 2^rmax,
/// l = 2w) when it is not; strict mode throws a resolution error.
Params fit_resolution(Params params, int rmax);

/// Smallest g <= 30 meeting the resolution requirement for `rmax`, or 30.
int auto_resolution(const Params& params, int rmax);

/// Throws a parameter error naming the first invalid field.
void validate_params(const Params& params);

struct Ray {
  Point origin;
  AngleIndex angle;

  Point at(double rho) const { return origin + rho * angle.direction(); }
};

Ray radial_ray(Point center, AngleIndex j);
double point_ray_distance(Point q, const Ray& ray);

/// Intersections a, b of the perpendicular to r_j through q with r_{j+1} and
/// r_{j-1}. Requires M >= 8 and q != center.
std::pair<Point, Point> secant_observation_check(Point center, Point q, AngleIndex j);

struct ChainLink {
  Point p;
  /// Anchor point on the ray; exact construction point, not a grid point.
  Point q;
  AngleIndex ray;
};

enum class ChainEnd { completed, exited_square, backtrack_found };

std::string_view to_string(ChainEnd end);

struct Backtrack {
  Point p;
  DiscreteLine line;
  Strip strip;
  OrientedRect r1;
  OrientedRect r2;
  DyadicSquare square;
  int scale = 0;
};

struct SpiralChain {
  DyadicSquare square;
  std::vector<ChainLink> links;
  ChainEnd end = ChainEnd::completed;
  std::optional<Backtrack> backtrack;

  std::size_t size() const { return links.size(); }
  std::vector<Point> points() const;
  /// Ray indices reduced to residues in [0, M).
  CycleWalk walk() const;
};

/// Grid cells whose centers lie in the rectangle.
std::vector<Cell> rect_cells(const GridSpec& grid, const OrientedRect& rect);

/// The chain construction on `square`: from p_i on ray r_j build the
/// rectangles R1, R2 and continue with the smallest grid point below p_i,
/// or stop with a backtrack when there is none.
SpiralChain spiral_chain(const OrderOracle& oracle, const DyadicSquare& square,
                         const Params& params);

/// The same geometry without an order: at step i the chain moves into R1 when
/// side(i) > 0 and into R2 otherwise, taking the grid point nearest the
/// rectangle center. Ends only by exit or cap.
SpiralChain steered_chain(const GridSpec& grid, const DyadicSquare& square, const Params& params,
                          const std::function<int(std::size_t)>& side);

/// An order in which the chain's points come first, in decreasing order
/// along the chain, and every other cell follows in `rest` order. Running
/// spiral_chain on it with the chain's length as cap reproduces a chain
/// that completes.
OrderOracle spiral_friendly_oracle(const GridSpec& grid, const SpiralChain& chain,
                                   OrderKind rest = OrderKind::rowmajor);

/// Checks strict decrease, the radius law, ray proximity and ray adjacency on
/// every prefix, plus the anchor bookkeeping. Radii use the exponent i - 1
/// so that p_1 sits at radius 1/4. Empty when every law holds.
std::optional<std::string> check_chain_laws(const OrderOracle& oracle, const SpiralChain& chain,
                                            const Params& params, double tol = 1e-9);

/// Re-scans every grid point of R1 and R2 and rechecks the geometry.
std::optional<std::string> verify_backtrack(const OrderOracle& oracle, const Backtrack& bt,
                                            const Params& params);

std::optional<Backtrack> find_backtrack(const OrderOracle& oracle, const DyadicSquare& square,
                                        const Params& params);

struct AtlasEntry {
  DyadicSquare square;
  ChainEnd end = ChainEnd::exited_square;
  std::size_t chain_length = 0;
  std::optional<Backtrack> backtrack;
  /// Kept only for squares without a backtrack.
  std::optional<SpiralChain> chain;
};

struct BacktrackAtlas {
  std::vector<int> scales;
  std::vector<AtlasEntry> entries;

  std::size_t covered() const;
  bool full_coverage() const { return covered() == entries.size(); }
  const AtlasEntry* first_uncovered() const;
};

/// Runs find_backtrack on every square of the given scales (in parallel).
BacktrackAtlas build_atlas(const OrderOracle& oracle, const Params& params,
                           const std::vector<int>& scales,
                           std::size_t budget = kDefaultSquareBudget);

struct LineSample {
  DiscreteLine line{AngleIndex(4, 4), 0.0};
  std::uint64_t seed = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of the i-th line of a run with base seed `seed`.
std::uint64_t line_seed(std::uint64_t seed, std::size_t i);

/// Uniform angle index in [1, M], then a uniform offset among the offsets
/// whose line meets the unit square.
LineSample sample_line(int M, std::uint64_t seed);

/// Two-sided Hausdorff proximity of the clipped lines inside bt.square at
/// radius w * 2^-t / 2. A line missing the square never passes through.
bool passes_through(const LineSample& line, const Backtrack& bt, const Params& params);

struct BacktrackingSet {
  LineSample line;
  std::vector<int> scales;
  /// Bad squares per entry of `scales`.
  std::vector<std::vector<DyadicSquare>> bad;
  /// The backtrack points p_Q, one per distinct grid cell.
  std::vector<Point> points;
  double sigma = 0.0;
  double cost_order = 0.0;
  /// Projection-order detour tour and the bound sqrt(2) + 4 w sigma.
  std::vector<Point> detour_tour;
  double detour_length = 0.0;
  double detour_bound_rhs = 0.0;
  /// 2 cost + 1 and l * sum_t (sum_Q 2^-t - 18 / 2^c).
  double charging_bound_lhs = 0.0;
  double charging_bound_rhs = 0.0;

  double detour_bound_slack() const { return detour_bound_rhs - detour_length; }
  double charging_bound_slack() const { return charging_bound_lhs - charging_bound_rhs; }
};

/// Collects the bad squares of `line`. Throws a coverage error naming the
/// first uncovered square unless `allow_partial`, in which case uncovered
/// squares are skipped.
BacktrackingSet backtracking_set(const OrderOracle& oracle, const BacktrackAtlas& atlas,
                                 const LineSample& line, const Params& params,
                                 bool allow_partial = false);

struct SigmaEstimate {
  std::size_t samples = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  /// Sum over covered squares of 2^-t * w 2^-t / (2M).
  double prediction = 0.0;
};

SigmaEstimate estimate_sigma_expectation(const BacktrackAtlas& atlas, const Params& params,
                                         std::size_t samples, std::uint64_t seed);

struct ZigZagSet {
  DichotomyOutcome outcome;
  int s = 0;
  std::size_t chain_length = 0;
  /// Chain stopped before M^2 points (desk mode).
  bool truncated = false;
  std::vector<Point> points;
  RatioReport report;
  /// Explicit tour: three rays for a zig-zag, an angular sweep when confined.
  std::vector<Point> tour;
  double tour_length = 0.0;
  /// cost / min(tsp_upper, tour_length); at least report.ratio_lower.
  double certified_ratio = 0.0;
  /// s^3 / M^2 + s / (7 M^2), the stated tour bound for the confined set.
  std::optional<double> confined_tour_bound;
  double min_step = 0.0;
  double min_step_bound = 0.0;
};

/// Minimum chain length accepted in desk mode: 7 s^3.
std::size_t min_zigzag_chain(const Params& params);

ZigZagSet zigzag_set(const OrderOracle& oracle, const SpiralChain& chain, const Params& params);

enum class CaseKind { a, a_partial, b_zigzag, b_confined, inconclusive };

std::string_view to_string(CaseKind kind);

struct CaseOptions {
  std::vector<int> scales;  // empty: params.scales()
  std::size_t lines = 1000;
  std::uint64_t seed = 1;
};


struct CaseReport {
  CaseKind kind = CaseKind::inconclusive;
  Params params;
  std::vector<int> scales;
  std::size_t squares = 0;
  std::size_t covered = 0;
  std::optional<DyadicSquare> case_b_square;
  std::size_t lines = 0;
  std::size_t detour_bound_violations = 0;
  std::size_t charging_bound_violations = 0;
  double min_detour_bound_slack = 0.0;
  double min_charging_bound_slack = 0.0;
  BacktrackAtlas atlas;
  std::optional<BacktrackingSet> best;
  std::optional<ZigZagSet> zigzag;
  std::vector<Point> set;
  std::optional<RatioReport> report;
};

/// CASE B when some square has no backtrack and its chain is long enough for
/// the walk dichotomy; otherwise samples lines over the backtracks found (CASE A
/// when every square is covered) and keeps the line whose set has the
/// largest certified ratio.
CaseReport run_case_dichotomy(const OrderOracle& oracle, const Params& params,
                              const CaseOptions& options = {});

/// Re-runs every certificate of a report: backtrack scans over the atlas,
/// chain laws of retained chains and the walk witness. Empty when all pass.
std::optional<std::string> verify_report(const OrderOracle& oracle, const CaseReport& report);

/// Runs body(i) for i in [0, n) on all hardware threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace utsp
