#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace utsp {

/// Comparison tolerance for incidence tests. Construction gaps (rectangle
/// sizes, chain step lengths) are many orders of magnitude larger.
inline constexpr double kGeoTol = 1e-12;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double k, Point a) { return {k * a.x, k * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

double dist(Point a, Point b);

inline const Point kSquareCenter{0.5, 0.5};

/// One of the M discrete directions j * 2pi / M. The index is kept in
/// [1, M]; index M is the direction (1, 0).
class AngleIndex {
 public:
  AngleIndex(long long j, int count);

  int index() const { return j_; }
  int count() const { return m_; }
  double radians() const;
  /// Unit vector (cos, sin), exact on the coordinate axes.
  Point direction() const;

  AngleIndex shifted(long long k) const { return AngleIndex(j_ + k, m_); }
  AngleIndex next() const { return shifted(1); }
  AngleIndex prev() const { return shifted(-1); }
  /// Direction rotated by a quarter turn. Requires M divisible by 4.
  AngleIndex perpendicular() const;

  friend bool operator==(const AngleIndex&, const AngleIndex&) = default;

 private:
  int j_;
  int m_;
};

/// Unit vector for angle j * 2pi / m with exact values on quarter turns.
Point unit_direction(long long j, int m);

/// A line with one of the M discrete slopes, stored as the signed offset of
/// the line from the square's center (1/2, 1/2) along the left normal.
class DiscreteLine {
 public:
  DiscreteLine(AngleIndex angle, double offset) : angle_(angle), offset_(offset) {}

  /// The line with the given direction passing through p.
  static DiscreteLine through(AngleIndex angle, Point p);
  /// Rejects any angle that is not a multiple of 2pi / m.
  static DiscreteLine from_radians(double theta, int m, double offset);

  const AngleIndex& angle() const { return angle_; }
  double offset() const { return offset_; }
  Point direction() const { return angle_.direction(); }
  Point normal() const;
  /// Foot of the perpendicular from the square's center.
  Point anchor() const;
  double signed_distance(Point q) const;

 private:
  AngleIndex angle_;
  double offset_;
};

/// Largest |offset| for which a line of this angle meets [0,1]^2.
double admissible_offset(const AngleIndex& angle);

struct Strip {
  DiscreteLine line;
  double halfwidth;

  bool contains(Point q) const;
};

struct OrientedRect {
  Point center;
  AngleIndex angle;  // long axis
  double length;
  double width;

  std::vector<Point> corners() const;
};

struct Segment {
  Point a;
  Point b;

  double length() const { return dist(a, b); }
};

struct Box {
  double x0, y0, x1, y1;

  bool contains(Point q, double tol = kGeoTol) const {
    return q.x >= x0 - tol && q.x <= x1 + tol && q.y >= y0 - tol && q.y <= y1 + tol;
  }
};

inline constexpr Box kUnitBox{0.0, 0.0, 1.0, 1.0};

struct DyadicSquare {
  int t = 0;
  std::uint32_t ix = 0;
  std::uint32_t iy = 0;

  double side() const { return std::ldexp(1.0, -t); }
  Box box() const;
  Point center() const;
  /// The concentric square of three times the side, clipped to [0,1]^2.
  Box tripled() const;
  bool contains(Point q, double tol = kGeoTol) const { return box().contains(q, tol); }
  /// Image of a point of the unit square under the affine map onto this square.
  Point from_unit(Point u) const;

  friend bool operator==(const DyadicSquare&, const DyadicSquare&) = default;
};

double point_line_distance(Point q, const DiscreteLine& line);
double point_segment_distance(Point q, const Segment& s);
bool rect_contains(const OrientedRect& rect, Point q);
bool rect_inside_box(const OrientedRect& rect, const Box& box, double tol = kGeoTol);

std::optional<Segment> clip_line_to_box(const DiscreteLine& line, const Box& box);
std::optional<Segment> clip_line_to_square(const DiscreteLine& line, const DyadicSquare& square);

/// Exact Hausdorff distance between two segments. The distance to a segment
/// is convex along the other segment, so the directed part is attained at an
/// endpoint.
double segment_hausdorff(const Segment& a, const Segment& b);
bool segment_hausdorff_within(const Segment& a, const Segment& b, double eps);

inline constexpr std::size_t kDefaultSquareBudget = std::size_t{1} << 22;

/// Visits the 2^{2t} squares of scale t in row-major order.
void for_each_dyadic_square(int t, const std::function<void(const DyadicSquare&)>& visit);
std::vector<DyadicSquare> dyadic_squares(int t, std::size_t budget = kDefaultSquareBudget);

}  // namespace utsp
