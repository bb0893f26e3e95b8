#pragma once

#include <algorithm>
#include <cmath>

namespace gaitvibe
{

/// Point or vector on the floor plane, meters.
struct Point2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Axis-aligned rectangle. Empty when min exceeds max on either axis.
struct Rect
{
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  static Rect centered(Point2 c, double half_x, double half_y)
  {
    return {c.x - half_x, c.x + half_x, c.y - half_y, c.y + half_y};
  }

  bool empty() const { return x_min > x_max || y_min > y_max; }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double diagonal() const { return std::hypot(width(), height()); }
  Point2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  bool contains(Point2 p, double tol = 1e-12) const
  {
    return p.x >= x_min - tol && p.x <= x_max + tol && p.y >= y_min - tol && p.y <= y_max + tol;
  }

  Point2 clamp(Point2 p) const
  {
    return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
  }

  Rect dilated(double margin) const
  {
    return {x_min - margin, x_max + margin, y_min - margin, y_max + margin};
  }

  Rect intersect(const Rect& o) const
  {
    return {std::max(x_min, o.x_min), std::min(x_max, o.x_max), std::max(y_min, o.y_min),
            std::min(y_max, o.y_max)};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

} // namespace gaitvibe
