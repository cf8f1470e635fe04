#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/landmarks.hpp"

namespace painreg {

constexpr int kGeometricFeatureDim = 218;
constexpr std::array<int, 6> kGeometricBlockSizes = {98, 20, 17, 49, 18, 16};

struct GeometricFeature {
  std::array<double, kGeometricFeatureDim> values{};
  bool degenerate_angle_flag = false;  // a coincident-landmark angle was coerced to 180
};

// Angle at mid between the rays mid->prev and mid->next, degrees in [0,180].
inline double interior_angle_deg(const Vec2& prev, const Vec2& mid, const Vec2& next) {
  const Vec2 a = prev - mid;
  const Vec2 b = next - mid;
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12)
    raise(errc::degenerate_angle, "coincident points leave the angle undefined");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

// Segment and angle index tables for blocks 2/3/5/6. Brows and the inner lip
// are open chains, eyes and the outer lip closed loops; that assignment is the
// one reproducing the 20/17/18/16 block sizes under the 66-point scheme.
struct GeometryTables {
  std::vector<std::pair<int, int>> eye_brow_segments;       // 20
  std::vector<std::pair<int, int>> mouth_segments;          // 17
  std::vector<std::array<int, 3>> eye_brow_angle_triples;   // 18
  std::vector<std::array<int, 3>> mouth_angle_triples;      // 16

  static GeometryTables from_scheme(const LandmarkScheme& s) {
    GeometryTables t;
    auto open_segments = [](const std::vector<int>& chain, auto& out) {
      for (size_t i = 0; i + 1 < chain.size(); ++i) out.push_back({chain[i], chain[i + 1]});
    };
    auto closed_segments = [](const std::vector<int>& loop, auto& out) {
      for (size_t i = 0; i < loop.size(); ++i)
        out.push_back({loop[i], loop[(i + 1) % loop.size()]});
    };
    auto open_angles = [](const std::vector<int>& chain, auto& out) {
      for (size_t i = 1; i + 1 < chain.size(); ++i)
        out.push_back({chain[i - 1], chain[i], chain[i + 1]});
    };
    auto closed_angles = [](const std::vector<int>& loop, auto& out) {
      const size_t n = loop.size();
      for (size_t i = 0; i < n; ++i)
        out.push_back({loop[(i + n - 1) % n], loop[i], loop[(i + 1) % n]});
    };

    open_segments(s.brow_left, t.eye_brow_segments);
    open_segments(s.brow_right, t.eye_brow_segments);
    closed_segments(s.eye_left, t.eye_brow_segments);
    closed_segments(s.eye_right, t.eye_brow_segments);

    closed_segments(s.mouth_outer, t.mouth_segments);
    open_segments(s.mouth_inner, t.mouth_segments);

    open_angles(s.brow_left, t.eye_brow_angle_triples);
    open_angles(s.brow_right, t.eye_brow_angle_triples);
    closed_angles(s.eye_left, t.eye_brow_angle_triples);
    closed_angles(s.eye_right, t.eye_brow_angle_triples);

    closed_angles(s.mouth_outer, t.mouth_angle_triples);
    open_angles(s.mouth_inner, t.mouth_angle_triples);
    return t;
  }
};

namespace detail {

inline double angle_or_flat(const Shape66& pts, const std::array<int, 3>& triple,
                            bool& degenerate_flag) {
  try {
    return interior_angle_deg(pts[static_cast<size_t>(triple[0])],
                              pts[static_cast<size_t>(triple[1])],
                              pts[static_cast<size_t>(triple[2])]);
  } catch (const Error& e) {
    if (e.code() != errc::degenerate_angle) throw;
    degenerate_flag = true;  // tracker glitch; treat the chain as locally flat
    return 180.0;
  }
}

}  // namespace detail

// 218-D shape feature: displacement(98) | eye/brow distances(20) |
// mouth distances(17) | stable-median distances(49) | eye/brow angles(18) |
// mouth angles(16). Landmarks and mean shape must share one frame.
inline GeometricFeature extract_geometric(const Shape66& aligned, const Shape66& mean,
                                          const LandmarkScheme& scheme,
                                          const GeometryTables& tables) {
  GeometricFeature f;
  size_t k = 0;

  const std::vector<int> inner = scheme.inner49();
  for (int idx : inner) {
    const Vec2 d = aligned[static_cast<size_t>(idx)] - mean[static_cast<size_t>(idx)];
    f.values[k++] = d.x;
    f.values[k++] = d.y;
  }

  for (const auto& [i, j] : tables.eye_brow_segments)
    f.values[k++] = (aligned[static_cast<size_t>(i)] - aligned[static_cast<size_t>(j)]).norm();
  for (const auto& [i, j] : tables.mouth_segments)
    f.values[k++] = (aligned[static_cast<size_t>(i)] - aligned[static_cast<size_t>(j)]).norm();

  // coordinate-wise median of the stable points
  std::vector<double> xs, ys;
  xs.reserve(scheme.stable.size());
  ys.reserve(scheme.stable.size());
  for (int idx : scheme.stable) {
    xs.push_back(aligned[static_cast<size_t>(idx)].x);
    ys.push_back(aligned[static_cast<size_t>(idx)].y);
  }
  auto median = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const Vec2 stable_median{median(xs), median(ys)};
  for (int idx : inner)
    f.values[k++] = (aligned[static_cast<size_t>(idx)] - stable_median).norm();

  for (const auto& triple : tables.eye_brow_angle_triples)
    f.values[k++] = detail::angle_or_flat(aligned, triple, f.degenerate_angle_flag);
  for (const auto& triple : tables.mouth_angle_triples)
    f.values[k++] = detail::angle_or_flat(aligned, triple, f.degenerate_angle_flag);

  if (k != kGeometricFeatureDim)
    raise(errc::bad_config, "geometry tables do not produce a 218-D feature");
  return f;
}

}  // namespace painreg
