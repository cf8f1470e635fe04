#pragma once

#include <cmath>

namespace painreg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double squared_norm() const { return x * x + y * y; }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// 4-dof similarity: p -> scale * R(rotation) * p + translation. No reflection.
struct SimilarityTransform {
  double scale = 1.0;
  double rotation = 0.0;  // radians
  Vec2 translation{0.0, 0.0};

  Vec2 apply(const Vec2& p) const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    return {scale * (c * p.x - s * p.y) + translation.x,
            scale * (s * p.x + c * p.y) + translation.y};
  }

  SimilarityTransform inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = -rotation;
    const double c = std::cos(-rotation), s = std::sin(-rotation);
    inv.translation = {-inv.scale * (c * translation.x - s * translation.y),
                       -inv.scale * (s * translation.x + c * translation.y)};
    return inv;
  }

  bool near_identity(double tol) const {
    return std::abs(scale - 1.0) < tol && std::abs(rotation) < tol &&
           std::abs(translation.x) < tol && std::abs(translation.y) < tol;
  }
};

// outer ∘ inner: applies inner first.
inline SimilarityTransform composed(const SimilarityTransform& outer,
                                    const SimilarityTransform& inner) {
  SimilarityTransform t;
  t.scale = outer.scale * inner.scale;
  t.rotation = outer.rotation + inner.rotation;
  t.translation = outer.apply(inner.translation);
  return t;
}

}  // namespace painreg
