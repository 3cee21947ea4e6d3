#pragma once

#include <cmath>

namespace torusflow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// A point (or displacement) on the flat 2-torus [0, 2*pi)^2.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double a, const Vec2& v) { return {a * v.x, a * v.y}; }

inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

inline Vec2 wrap_point(const Vec2& p) { return {wrap_angle(p.x), wrap_angle(p.y)}; }

/// Signed distance between two angles along the circle, in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > kTwoPi / 2.0) d -= kTwoPi;
  if (d <= -kTwoPi / 2.0) d += kTwoPi;
  return d;
}

}  // namespace torusflow
