#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/geometry.hpp"
#include "painreg/image.hpp"
#include "painreg/landmarks.hpp"
#include "painreg/provenance.hpp"

namespace painreg {

// Mean shape in the canonical frame: centroid at the origin, root-mean-square
// point norm 1, eye-corner line horizontal.
struct MeanShape {
  Shape66 points{};
  std::string provenance_label;  // "full-dataset" or the training-fold id
  Provenance provenance;
};

struct Alignment {
  Shape66 points{};  // landmarks mapped into the canonical (unit) frame
  SimilarityTransform raw_to_canonical;
};

namespace detail {

inline Vec2 shape_centroid(const Shape66& s) {
  Vec2 c{0, 0};
  for (const auto& p : s) c += p;
  return c / static_cast<double>(kNumLandmarks);
}

inline double shape_rms(const Shape66& s) {
  double acc = 0.0;
  for (const auto& p : s) acc += p.squared_norm();
  return std::sqrt(acc / kNumLandmarks);
}

// Center and scale to the canonical gauge (rotation untouched).
inline Shape66 normalized_shape(const Shape66& s) {
  const Vec2 c = shape_centroid(s);
  Shape66 out;
  for (int i = 0; i < kNumLandmarks; ++i) out[i] = s[i] - c;
  const double rms = shape_rms(out);
  if (rms < 1e-300) raise(errc::degenerate_anchors, "shape collapses to a point");
  for (auto& p : out) p = p / rms;
  return out;
}

inline Shape66 rotated_shape(const Shape66& s, double angle) {
  SimilarityTransform r;
  r.rotation = angle;
  Shape66 out;
  for (int i = 0; i < kNumLandmarks; ++i) out[i] = r.apply(s[i]);
  return out;
}

}  // namespace detail

// Least-squares similarity (scale, rotation, translation; no reflection)
// mapping src onto dst, solved in closed form from the cross-covariance.
inline SimilarityTransform fit_similarity(std::span<const Vec2> src,
                                          std::span<const Vec2> dst) {
  if (src.size() != dst.size() || src.size() < 2)
    raise(errc::bad_input, "similarity fit needs matching point lists of size >= 2");
  const auto n = static_cast<double>(src.size());
  Vec2 src_mean{0, 0}, dst_mean{0, 0};
  for (const auto& p : src) src_mean += p;
  for (const auto& q : dst) dst_mean += q;
  src_mean = src_mean / n;
  dst_mean = dst_mean / n;

  double sxx = 0.0;  // source scatter
  double a = 0.0, b = 0.0;
  double cov_xx = 0.0, cov_xy = 0.0, cov_yy = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    const Vec2 p = src[i] - src_mean;
    const Vec2 q = dst[i] - dst_mean;
    sxx += p.squared_norm();
    a += p.dot(q);
    b += p.cross(q);
    cov_xx += p.x * p.x;
    cov_xy += p.x * p.y;
    cov_yy += p.y * p.y;
  }
  if (sxx < 1e-20) raise(errc::degenerate_anchors, "anchor points are coincident");
  // collinearity: smaller principal variance vanishes relative to the larger
  const double tr = cov_xx + cov_yy;
  const double det = cov_xx * cov_yy - cov_xy * cov_xy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double lam_min = tr / 2.0 - disc;
  const double lam_max = tr / 2.0 + disc;
  if (lam_max <= 0.0 || lam_min / lam_max < 1e-12)
    raise(errc::degenerate_anchors, "anchor points are collinear within tolerance");

  const double mag = std::sqrt(a * a + b * b);
  if (mag < 1e-300) raise(errc::degenerate_anchors, "rotation is undetermined");
  SimilarityTransform t;
  t.rotation = std::atan2(b, a);
  t.scale = mag / sxx;
  const double c = std::cos(t.rotation), s = std::sin(t.rotation);
  t.translation = {dst_mean.x - t.scale * (c * src_mean.x - s * src_mean.y),
                   dst_mean.y - t.scale * (s * src_mean.x + c * src_mean.y)};
  return t;
}

// Generalized Procrustes mean over all 66 points. Iterates align/average/
// renormalize until the mean moves less than 1e-8 RMS or 100 iterations,
// then pins the rotation gauge (eye-corner line horizontal).
inline MeanShape compute_mean_shape(const std::vector<LandmarkFrame>& frames,
                                    const LandmarkScheme& scheme = LandmarkScheme::standard()) {
  if (frames.empty()) raise(errc::empty_dataset, "mean shape needs at least one frame");
  for (const auto& f : frames) validate_landmarks(f.points);

  Shape66 mean = detail::normalized_shape(frames[0].points);
  for (int iter = 0; iter < 100; ++iter) {
    Shape66 accum{};
    for (const auto& f : frames) {
      const SimilarityTransform t = fit_similarity(
          std::span<const Vec2>(f.points), std::span<const Vec2>(mean));
      for (int i = 0; i < kNumLandmarks; ++i) accum[i] += t.apply(f.points[i]);
    }
    for (auto& p : accum) p = p / static_cast<double>(frames.size());
    const Shape66 next = detail::normalized_shape(accum);
    double move = 0.0;
    for (int i = 0; i < kNumLandmarks; ++i) move += (next[i] - mean[i]).squared_norm();
    move = std::sqrt(move / kNumLandmarks);
    mean = next;
    if (move < 1e-8) break;
  }

  // canonical rotation: left-to-right inter-eye direction along +x
  const Vec2 u = eye_center(mean, scheme.eye_right) - eye_center(mean, scheme.eye_left);
  if (u.norm() > 1e-12) mean = detail::rotated_shape(mean, -std::atan2(u.y, u.x));

  MeanShape result;
  result.points = mean;
  for (const auto& f : frames) result.provenance.add(f.subject_id);
  return result;
}

// Fits the similarity on the anchor points only, then maps all 66 points.
inline Alignment procrustes_align(const LandmarkFrame& frame, const MeanShape& mean,
                                  const std::vector<int>& anchors) {
  validate_landmarks(frame.points);
  if (anchors.size() < 3) raise(errc::bad_input, "need at least 3 anchor indices");
  std::vector<Vec2> src, dst;
  src.reserve(anchors.size());
  dst.reserve(anchors.size());
  for (int idx : anchors) {
    if (idx < 0 || idx >= kNumLandmarks)
      raise(errc::bad_input, "anchor index out of range: " + std::to_string(idx));
    src.push_back(frame.points[static_cast<size_t>(idx)]);
    dst.push_back(mean.points[static_cast<size_t>(idx)]);
  }
  Alignment out;
  out.raw_to_canonical = fit_similarity(src, dst);
  for (int i = 0; i < kNumLandmarks; ++i)
    out.points[i] = out.raw_to_canonical.apply(frame.points[i]);
  return out;
}

inline double anchor_residual(const Shape66& aligned, const MeanShape& mean,
                              const std::vector<int>& anchors) {
  double acc = 0.0;
  for (int idx : anchors)
    acc += (aligned[static_cast<size_t>(idx)] - mean.points[static_cast<size_t>(idx)])
               .squared_norm();
  return std::sqrt(acc / static_cast<double>(anchors.size()));
}

// Mapping from the canonical unit frame to the fixed-size crop: the mean-shape
// bounding box padded 20% per side fits the crop along its larger dimension,
// centered. Uniform scale, so raw->crop stays a similarity.
struct CanonicalFrame {
  SimilarityTransform canonical_to_px;
  int size = 128;

  static CanonicalFrame from_mean(const MeanShape& mean, int size = 128, double pad = 0.2) {
    Vec2 lo{mean.points[0]}, hi{mean.points[0]};
    for (const auto& p : mean.points) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
    const double extent = std::max(hi.x - lo.x, hi.y - lo.y);
    const double side = extent * (1.0 + 2.0 * pad);
    const Vec2 center = (lo + hi) / 2.0;
    CanonicalFrame f;
    f.size = size;
    f.canonical_to_px.scale = static_cast<double>(size) / side;
    f.canonical_to_px.rotation = 0.0;
    f.canonical_to_px.translation = {size / 2.0 - f.canonical_to_px.scale * center.x,
                                     size / 2.0 - f.canonical_to_px.scale * center.y};
    return f;
  }

  Shape66 to_pixels(const Shape66& canonical) const {
    Shape66 out;
    for (int i = 0; i < kNumLandmarks; ++i) out[i] = canonical_to_px.apply(canonical[i]);
    return out;
  }
};

struct AlignedFace {
  Shape66 points_px{};  // landmarks in crop pixel coordinates
  GrayImage crop;
  SimilarityTransform raw_to_px;
};

// Warps the source image into the canonical crop by the fitted similarity,
// sampling bilinearly with border replication.
inline AlignedFace crop_and_normalize_face(const GrayImage& image, const LandmarkFrame& frame,
                                           const Alignment& alignment,
                                           const CanonicalFrame& canonical) {
  for (const auto& p : frame.points)
    if (p.x < 0.0 || p.y < 0.0 || p.x > image.width() || p.y > image.height())
      raise(errc::out_of_bounds, "landmark outside image for frame " + frame.frame_id);

  AlignedFace face;
  face.raw_to_px = composed(canonical.canonical_to_px, alignment.raw_to_canonical);
  face.points_px = canonical.to_pixels(alignment.points);
  face.crop = GrayImage(canonical.size, canonical.size);
  const SimilarityTransform px_to_raw = face.raw_to_px.inverse();
  for (int y = 0; y < canonical.size; ++y) {
    for (int x = 0; x < canonical.size; ++x) {
      const Vec2 raw = px_to_raw.apply({x + 0.5, y + 0.5});
      const double v = bilinear_sample_clamped(image, raw.x, raw.y);
      face.crop.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return face;
}

}  // namespace painreg
