#include "utsp/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

#include "utsp/error.hpp"

namespace utsp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::snap: return "snap";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::format: return "format";
    case ErrorKind::size: return "size";
    case ErrorKind::witness: return "witness";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::constraint: return "constraint";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::enumeration: return "enumeration";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::construction: return "construction";
    case ErrorKind::coverage: return "coverage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point unit_direction(long long j, int m) {
  // Reduce to a quadrant so that axis directions come out exact and the
  // M directions are symmetric under quarter turns.
  long long k = ((j % m) + m) % m;
  long long scaled = 4 * k;
  long long quadrant = scaled / m;
  long long rem = scaled % m;
  double c = 1.0;
  double s = 0.0;
  if (rem != 0) {
    double phi = (static_cast<double>(rem) / m) * (std::numbers::pi / 2.0);
    c = std::cos(phi);
    s = std::sin(phi);
  }
  switch (quadrant) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

AngleIndex::AngleIndex(long long j, int count) : m_(count) {
  if (count < 1) throw Error(ErrorKind::parameter, "angle count must be positive");
  long long k = ((j % count) + count) % count;
  j_ = static_cast<int>(k == 0 ? count : k);
}

double AngleIndex::radians() const { return 2.0 * std::numbers::pi * j_ / m_; }

Point AngleIndex::direction() const { return unit_direction(j_, m_); }

AngleIndex AngleIndex::perpendicular() const {
  if (m_ % 4 != 0) {
    throw Error(ErrorKind::parameter, "perpendicular slope needs M divisible by 4");
  }
  return shifted(m_ / 4);
}

DiscreteLine DiscreteLine::through(AngleIndex angle, Point p) {
  DiscreteLine probe(angle, 0.0);
  return DiscreteLine(angle, dot(p - kSquareCenter, probe.normal()));
}

DiscreteLine DiscreteLine::from_radians(double theta, int m, double offset) {
  double steps = theta * m / (2.0 * std::numbers::pi);
  double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9) {
    std::ostringstream msg;
    msg << "angle " << theta << " is not a multiple of 2pi/" << m;
    throw Error(ErrorKind::parameter, msg.str());
  }
  return DiscreteLine(AngleIndex(static_cast<long long>(rounded), m), offset);
}

Point DiscreteLine::normal() const {
  Point d = direction();
  return {-d.y, d.x};
}

Point DiscreteLine::anchor() const { return kSquareCenter + offset_ * normal(); }

double DiscreteLine::signed_distance(Point q) const {
  return dot(q - kSquareCenter, normal()) - offset_;
}

double admissible_offset(const AngleIndex& angle) {
  Point d = angle.direction();
  return 0.5 * (std::abs(d.x) + std::abs(d.y));
}

bool Strip::contains(Point q) const {
  return point_line_distance(q, line) <= halfwidth + kGeoTol;
}

std::vector<Point> OrientedRect::corners() const {
  Point u = angle.direction();
  Point v{-u.y, u.x};
  double a = 0.5 * length;
  double b = 0.5 * width;
  return {center + a * u + b * v, center - a * u + b * v, center - a * u - b * v,
          center + a * u - b * v};
}

Box DyadicSquare::box() const {
  double s = side();
  return {ix * s, iy * s, (ix + 1) * s, (iy + 1) * s};
}

Point DyadicSquare::center() const {
  double s = side();
  return {(ix + 0.5) * s, (iy + 0.5) * s};
}

Box DyadicSquare::tripled() const {
  double s = side();
  Box b = box();
  return {std::max(0.0, b.x0 - s), std::max(0.0, b.y0 - s), std::min(1.0, b.x1 + s),
          std::min(1.0, b.y1 + s)};
}

Point DyadicSquare::from_unit(Point u) const {
  double s = side();
  return {(ix + u.x) * s, (iy + u.y) * s};
}

double point_line_distance(Point q, const DiscreteLine& line) {
  return std::abs(line.signed_distance(q));
}

double point_segment_distance(Point q, const Segment& s) {
  Point d = s.b - s.a;
  double len2 = dot(d, d);
  if (len2 == 0.0) return dist(q, s.a);
  double u = std::clamp(dot(q - s.a, d) / len2, 0.0, 1.0);
  return dist(q, s.a + u * d);
}

bool rect_contains(const OrientedRect& rect, Point q) {
  Point u = rect.angle.direction();
  Point v{-u.y, u.x};
  Point rel = q - rect.center;
  return std::abs(dot(rel, u)) <= 0.5 * rect.length + kGeoTol &&
         std::abs(dot(rel, v)) <= 0.5 * rect.width + kGeoTol;
}

bool rect_inside_box(const OrientedRect& rect, const Box& box, double tol) {
  for (Point c : rect.corners()) {
    if (!box.contains(c, tol)) return false;
  }
  return true;
}

std::optional<Segment> clip_line_to_box(const DiscreteLine& line, const Box& box) {
  Point o = line.anchor();
  Point d = line.direction();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto clip_axis = [&](double origin, double dir, double min, double max) {
    if (dir == 0.0) {
      if (origin < min - kGeoTol || origin > max + kGeoTol) {
        lo = 1.0;
        hi = 0.0;
      }
      return;
    }
    double s0 = (min - origin) / dir;
    double s1 = (max - origin) / dir;
    if (s0 > s1) std::swap(s0, s1);
    lo = std::max(lo, s0);
    hi = std::min(hi, s1);
  };
  clip_axis(o.x, d.x, box.x0, box.x1);
  clip_axis(o.y, d.y, box.y0, box.y1);
  if (lo > hi + kGeoTol) return std::nullopt;
  if (lo > hi) hi = lo;
  return Segment{o + lo * d, o + hi * d};
}

std::optional<Segment> clip_line_to_square(const DiscreteLine& line, const DyadicSquare& square) {
  return clip_line_to_box(line, square.box());
}

double segment_hausdorff(const Segment& a, const Segment& b) {
  double ab = std::max(point_segment_distance(a.a, b), point_segment_distance(a.b, b));
  double ba = std::max(point_segment_distance(b.a, a), point_segment_distance(b.b, a));
  return std::max(ab, ba);
}

bool segment_hausdorff_within(const Segment& a, const Segment& b, double eps) {
  return segment_hausdorff(a, b) <= eps + kGeoTol;
}

void for_each_dyadic_square(int t, const std::function<void(const DyadicSquare&)>& visit) {
  if (t < 0 || t > 31) throw Error(ErrorKind::parameter, "scale must lie in [0, 31]");
  std::uint64_t n = std::uint64_t{1} << t;
  for (std::uint64_t iy = 0; iy < n; ++iy) {
    for (std::uint64_t ix = 0; ix < n; ++ix) {
      visit(DyadicSquare{t, static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy)});
    }
  }
}

std::vector<DyadicSquare> dyadic_squares(int t, std::size_t budget) {
  if (t < 0 || t > 31) throw Error(ErrorKind::parameter, "scale must lie in [0, 31]");
  if (2 * t >= 63 || (std::uint64_t{1} << (2 * t)) > budget) {
    std::ostringstream msg;
    msg << "scale " << t << " has 4^" << t << " squares, budget is " << budget;
    throw Error(ErrorKind::enumeration, msg.str());
  }
  std::vector<DyadicSquare> out;
  out.reserve(std::size_t{1} << (2 * t));
  for_each_dyadic_square(t, [&](const DyadicSquare& q) { out.push_back(q); });
  return out;
}

}  // namespace utsp
