#include "utsp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace utsp {

namespace {

constexpr double kSize = 520.0;
constexpr double kMargin = 30.0;
constexpr double kPlot = kSize - 2.0 * kMargin;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string open_svg(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize) +
                  "\" height=\"" + num(kSize) + "\" viewBox=\"0 0 " + num(kSize) + " " +
                  num(kSize) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kSize) + "\" height=\"" + num(kSize) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kMargin) + "\" y=\"18\" font-size=\"12\" font-family=\"sans-serif\">" +
       escape(title) + "</text>\n";
  return s;
}

// Maps the unit square (y up) onto the plot area.
struct UnitFrame {
  Box box{0.0, 0.0, 1.0, 1.0};

  double sx(double x) const { return kMargin + kPlot * (x - box.x0) / (box.x1 - box.x0); }
  double sy(double y) const { return kMargin + kPlot * (1.0 - (y - box.y0) / (box.y1 - box.y0)); }
};

std::string frame_rect() {
  return "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kPlot) +
         "\" height=\"" + num(kPlot) + "\" fill=\"none\" stroke=\"black\"/>\n";
}

std::string polyline(const std::vector<Point>& pts, const UnitFrame& f, const std::string& colour,
                     double width) {
  if (pts.size() < 2) return {};
  std::string s = "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"" + num(width) +
                  "\" points=\"";
  for (const Point& p : pts) s += num(f.sx(p.x)) + "," + num(f.sy(p.y)) + " ";
  s += "\"/>\n";
  return s;
}

}  // namespace

std::string render_points_svg(const std::vector<Point>& points, const std::vector<Point>& path,
                              const std::string& title) {
  UnitFrame f;
  std::string s = open_svg(title) + frame_rect();
  s += polyline(path, f, "#c0392b", 1.0);
  for (const Point& p : points) {
    s += "<circle cx=\"" + num(f.sx(p.x)) + "\" cy=\"" + num(f.sy(p.y)) +
         "\" r=\"2.5\" fill=\"#2c3e50\"/>\n";
  }
  return s + "</svg>\n";
}

std::string render_chain_svg(const std::vector<Point>& points, const Box& square, int M,
                             const std::string& title) {
  UnitFrame f{square};
  std::string s = open_svg(title) + frame_rect();
  const Point centre{(square.x0 + square.x1) / 2.0, (square.y0 + square.y1) / 2.0};
  const double reach = (square.x1 - square.x0) * 0.7071;
  for (int j = 1; j <= M && M > 0; ++j) {
    Point d = unit_direction(j, M);
    Point end = centre + reach * d;
    s += "<line x1=\"" + num(f.sx(centre.x)) + "\" y1=\"" + num(f.sy(centre.y)) + "\" x2=\"" +
         num(f.sx(end.x)) + "\" y2=\"" + num(f.sy(end.y)) +
         "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
  }
  s += polyline(points, f, "#2980b9", 0.6);
  for (const Point& p : points) {
    s += "<circle cx=\"" + num(f.sx(p.x)) + "\" cy=\"" + num(f.sy(p.y)) +
         "\" r=\"1.5\" fill=\"#2c3e50\"/>\n";
  }
  return s + "</svg>\n";
}

std::string render_ratio_svg(const std::vector<std::pair<double, double>>& n_ratio,
                             const std::string& title) {
  double xmax = 4.0;
  double ymax = 4.0;
  for (const auto& [n, ratio] : n_ratio) {
    if (n >= 1.0) xmax = std::max(xmax, std::log2(n));
    ymax = std::max(ymax, ratio);
  }
  xmax = std::ceil(xmax);
  ymax = std::ceil(std::max(ymax, xmax));
  auto sx = [&](double x) { return kMargin + kPlot * x / xmax; };
  auto sy = [&](double y) { return kMargin + kPlot * (1.0 - y / ymax); };

  std::string s = open_svg(title) + frame_rect();
  s += "<text x=\"" + num(kSize / 2.0) + "\" y=\"" + num(kSize - 8.0) +
       "\" font-size=\"11\" font-family=\"sans-serif\">log2 n</text>\n";
  s += "<text x=\"4\" y=\"" + num(kSize / 2.0) +
       "\" font-size=\"11\" font-family=\"sans-serif\">ratio</text>\n";
  // Reference curve: ratio = log2 n.
  s += "<line x1=\"" + num(sx(0.0)) + "\" y1=\"" + num(sy(0.0)) + "\" x2=\"" + num(sx(xmax)) +
       "\" y2=\"" + num(sy(xmax)) +
       "\" stroke=\"#999999\" stroke-dasharray=\"4 3\" class=\"reference-log-n\"/>\n";
  for (const auto& [n, ratio] : n_ratio) {
    if (n < 1.0) continue;
    double x = sx(std::log2(n));
    double y = sy(ratio);
    s += "<rect x=\"" + num(x - 3.0) + "\" y=\"" + num(y - 3.0) +
         "\" width=\"6\" height=\"6\" fill=\"#c0392b\"/>\n";
  }
  return s + "</svg>\n";
}

}  // namespace utsp
