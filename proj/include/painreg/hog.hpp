#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/image.hpp"
#include "painreg/landmarks.hpp"

namespace painreg {

struct HogParams {
  int patch = 24;  // square patch side, pixels
  int cells = 2;   // cells per patch side
  int bins = 9;    // unsigned orientation bins over [0,180)

  int descriptor_size() const { return cells * cells * bins; }
};

constexpr int kHogFeatureDim = 66 * 36;

// Descriptor of one patch: per-cell orientation histograms with soft linear
// binning between the two nearest bin centers (centers at k*180/bins degrees,
// wrapping at 180), concatenated cell-row-major and L2-normalized as one
// block. A constant patch yields the zero vector.
inline std::vector<double> hog_descriptor_patch(const GrayImage& patch,
                                                const HogParams& params = {}) {
  if (patch.width() != params.patch || patch.height() != params.patch)
    raise(errc::bad_patch, "expected a " + std::to_string(params.patch) + "x" +
                               std::to_string(params.patch) + " patch, got " +
                               std::to_string(patch.width()) + "x" +
                               std::to_string(patch.height()));
  if (params.patch % params.cells != 0)
    raise(errc::bad_config, "patch size must be divisible by the cell count");

  const int n = params.patch;
  const int cell_px = n / params.cells;
  const double bin_width = 180.0 / params.bins;
  std::vector<double> hist(static_cast<size_t>(params.descriptor_size()), 0.0);

  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      // centered differences with replicated borders
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, n - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, n - 1);
      const double gx = static_cast<double>(patch.at(xr, y)) - patch.at(xl, y);
      const double gy = static_cast<double>(patch.at(x, yd)) - patch.at(x, yu);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;

      double ori = std::atan2(gy, gx) * 180.0 / std::numbers::pi;  // (-180,180]
      if (ori < 0.0) ori += 180.0;                                 // unsigned
      if (ori >= 180.0) ori -= 180.0;

      const double t = ori / bin_width;
      const int b0 = static_cast<int>(std::floor(t)) % params.bins;
      const int b1 = (b0 + 1) % params.bins;
      const double w1 = t - std::floor(t);

      const int cell = (y / cell_px) * params.cells + (x / cell_px);
      double* cell_hist = hist.data() + static_cast<size_t>(cell) * params.bins;
      cell_hist[b0] += (1.0 - w1) * mag;
      cell_hist[b1] += w1 * mag;
    }
  }

  double norm = 0.0;
  for (double v : hist) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& v : hist) v /= norm;
  return hist;
}

// Extracts the patch whose top-left corner keeps a params.patch square inside
// the image, centered at the rounded point where possible.
inline GrayImage clamped_patch(const GrayImage& image, const Vec2& point,
                               const HogParams& params = {}) {
  const int n = params.patch;
  if (image.width() < n || image.height() < n)
    raise(errc::bad_patch, "image smaller than the patch size");
  const int cx = static_cast<int>(std::floor(point.x + 0.5));
  const int cy = static_cast<int>(std::floor(point.y + 0.5));
  const int left = std::clamp(cx - n / 2, 0, image.width() - n);
  const int top = std::clamp(cy - n / 2, 0, image.height() - n);
  GrayImage patch(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) patch.at(x, y) = image.at(left + x, top + y);
  return patch;
}

// Landmark-anchored appearance feature: one patch descriptor per point,
// concatenated in landmark index order (66 x 36 = 2376 with defaults).
inline std::vector<double> extract_hog(const GrayImage& crop, const Shape66& points_px,
                                       const HogParams& params = {}) {
  std::vector<double> feature;
  feature.reserve(static_cast<size_t>(kNumLandmarks) * params.descriptor_size());
  for (const auto& p : points_px) {
    const std::vector<double> d = hog_descriptor_patch(clamped_patch(crop, p, params), params);
    feature.insert(feature.end(), d.begin(), d.end());
  }
  return feature;
}

}  // namespace painreg
