#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/geometry.hpp"

namespace painreg {

constexpr int kNumLandmarks = 66;

using Shape66 = std::array<Vec2, kNumLandmarks>;

struct LandmarkFrame {
  std::string frame_id;
  std::string subject_id;
  std::string sequence_id;
  Shape66 points{};
};

inline void validate_landmarks(const Shape66& points) {
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      raise(errc::bad_input, "landmark coordinates must be finite");
}

// Index layout of the 66-point scheme: the standard 68-point layout minus two
// inner-mouth points. Jaw 0-16 is carried but unused by features.
struct LandmarkScheme {
  std::vector<int> brow_left;    // 17..21
  std::vector<int> brow_right;   // 22..26
  std::vector<int> nose;         // 27..35
  std::vector<int> eye_left;     // 36..41
  std::vector<int> eye_right;    // 42..47
  std::vector<int> mouth_outer;  // 48..59
  std::vector<int> mouth_inner;  // 60..65
  std::vector<int> anchors;      // eye corners + mouth corners
  std::vector<int> stable;       // nose + eye corners

  static LandmarkScheme standard() {
    LandmarkScheme s;
    auto range = [](int lo, int hi) {
      std::vector<int> v(static_cast<size_t>(hi - lo + 1));
      std::iota(v.begin(), v.end(), lo);
      return v;
    };
    s.brow_left = range(17, 21);
    s.brow_right = range(22, 26);
    s.nose = range(27, 35);
    s.eye_left = range(36, 41);
    s.eye_right = range(42, 47);
    s.mouth_outer = range(48, 59);
    s.mouth_inner = range(60, 65);
    s.anchors = {36, 39, 42, 45, 48, 54};
    s.stable = range(27, 35);
    for (int i : {36, 39, 42, 45}) s.stable.push_back(i);
    return s;
  }

  std::vector<int> inner49() const {
    std::vector<int> v;
    for (const auto* group : {&brow_left, &brow_right, &nose, &eye_left, &eye_right,
                              &mouth_outer, &mouth_inner})
      v.insert(v.end(), group->begin(), group->end());
    std::sort(v.begin(), v.end());
    return v;
  }

  std::vector<int> eye_region() const {  // brows + eyes, for the mask polygon
    std::vector<int> v;
    for (const auto* group : {&brow_left, &brow_right, &eye_left, &eye_right})
      v.insert(v.end(), group->begin(), group->end());
    return v;
  }

  std::vector<int> mouth_region() const {
    std::vector<int> v(mouth_outer);
    v.insert(v.end(), mouth_inner.begin(), mouth_inner.end());
    return v;
  }

  void validate() const {
    std::set<int> seen;
    for (const auto* group : {&brow_left, &brow_right, &nose, &eye_left, &eye_right,
                              &mouth_outer, &mouth_inner}) {
      for (int i : *group) {
        if (i < 0 || i >= kNumLandmarks)
          raise(errc::bad_config, "landmark index out of range: " + std::to_string(i));
        if (!seen.insert(i).second)
          raise(errc::bad_config, "landmark index repeated across groups: " + std::to_string(i));
      }
    }
    if (inner49().size() != 49)
      raise(errc::bad_config, "inner point set must have exactly 49 indices");
    for (int i : anchors)
      if (i < 0 || i >= kNumLandmarks)
        raise(errc::bad_config, "anchor index out of range: " + std::to_string(i));
    if (anchors.size() < 3) raise(errc::bad_config, "need at least 3 anchor indices");
  }
};

inline Vec2 centroid_of(const std::vector<Vec2>& pts) {
  Vec2 c{0, 0};
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

inline Vec2 eye_center(const Shape66& pts, const std::vector<int>& eye_indices) {
  Vec2 c{0, 0};
  for (int i : eye_indices) c += pts[static_cast<size_t>(i)];
  return c / static_cast<double>(eye_indices.size());
}

inline double inter_ocular_distance(const Shape66& pts, const LandmarkScheme& scheme) {
  return (eye_center(pts, scheme.eye_right) - eye_center(pts, scheme.eye_left)).norm();
}

}  // namespace painreg
