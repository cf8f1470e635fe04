#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/image.hpp"
#include "painreg/landmarks.hpp"

namespace painreg {

// Andrew's monotone chain; returns the hull in counter-clockwise order
// (y-down coordinates), without repeating the first point.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Inside-or-on test for a convex polygon with consistent winding.
inline bool point_in_convex_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  const size_t n = poly.size();
  if (n < 3) return false;
  bool has_pos = false, has_neg = false;
  for (size_t i = 0; i < n; ++i) {
    const double c = (poly[(i + 1) % n] - poly[i]).cross(p - poly[i]);
    if (c > 0) has_pos = true;
    if (c < 0) has_neg = true;
    if (has_pos && has_neg) return false;
  }
  return true;
}

struct BinaryMask {
  Image<std::uint8_t> mask;  // values are exactly 0 or 1
  std::vector<Vec2> eye_polygon;
  std::vector<Vec2> mouth_polygon;
};

namespace detail {

inline std::vector<Vec2> dilated_hull(const Shape66& pts, const std::vector<int>& indices,
                                      double margin) {
  std::vector<Vec2> region;
  region.reserve(indices.size());
  for (int i : indices) region.push_back(pts[static_cast<size_t>(i)]);
  std::vector<Vec2> hull = convex_hull(region);
  if (hull.size() < 3)
    raise(errc::degenerate_region, "region collapses to fewer than 3 distinct points");
  Vec2 c{0, 0};
  for (const auto& p : hull) c += p;
  c = c / static_cast<double>(hull.size());
  for (auto& p : hull) {
    const Vec2 d = p - c;
    const double n = d.norm();
    if (n > 1e-12) p += d * (margin / n);
  }
  return hull;
}

}  // namespace detail

// Eye and mouth region polygons (convex hulls pushed outward by 10% of the
// inter-ocular distance) rasterized over pixel centers.
inline BinaryMask build_binary_mask(const Shape66& points_px, const LandmarkScheme& scheme,
                                    int width, int height) {
  const double margin = 0.10 * inter_ocular_distance(points_px, scheme);
  BinaryMask out;
  out.eye_polygon = detail::dilated_hull(points_px, scheme.eye_region(), margin);
  out.mouth_polygon = detail::dilated_hull(points_px, scheme.mouth_region(), margin);
  out.mask = Image<std::uint8_t>(width, height, 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Vec2 p{x + 0.5, y + 0.5};
      if (point_in_convex_polygon(out.eye_polygon, p) ||
          point_in_convex_polygon(out.mouth_polygon, p))
        out.mask.at(x, y) = 1;
    }
  }
  return out;
}

// T=5 temporal stack: [I_{t-2}-I_t, I_{t-1}-I_t, I_t, I_{t+1}-I_t, I_{t+2}-I_t],
// with out-of-range indices clamped to the sequence ends. Planes are widened
// to signed int so differences are exact.
struct DifferenceStack {
  std::vector<Image<int>> planes;
  int center_plane = 0;
};

template <typename T>
inline DifferenceStack difference_stack(const std::vector<Image<T>>& frames, size_t t,
                                        int window = 5) {
  if (frames.empty()) raise(errc::empty_sequence, "difference stack needs frames");
  if (t >= frames.size()) raise(errc::bad_input, "frame index out of range");
  if (window < 1 || window % 2 == 0) raise(errc::bad_input, "temporal window must be odd");
  const int w = frames[0].width(), h = frames[0].height();
  const int half = window / 2;

  auto widened = [&](size_t j) {
    Image<int> out(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(x, y) = static_cast<int>(frames[j].at(x, y));
    return out;
  };
  const Image<int> center = widened(t);

  DifferenceStack stack;
  stack.center_plane = half;
  stack.planes.reserve(static_cast<size_t>(window));
  for (int offset = -half; offset <= half; ++offset) {
    const auto j = static_cast<size_t>(
        std::clamp<long>(static_cast<long>(t) + offset, 0, static_cast<long>(frames.size()) - 1));
    if (offset == 0) {
      stack.planes.push_back(center);
      continue;
    }
    Image<int> plane = widened(j);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) plane.at(x, y) -= center.at(x, y);
    stack.planes.push_back(std::move(plane));
  }
  return stack;
}

// Per-frame feature vectors for one channel. std::map keeps iteration (and
// everything serialized from it) deterministic.
struct FeatureTable {
  std::string channel_id;
  size_t dim = 0;
  std::map<std::string, std::vector<double>> by_frame;
};

struct ExternalChannelSpec {
  std::string channel_id;
  size_t dim = 0;  // 0 = take the dimensionality from the file header
};

// Text format: header "frame_id,<dim>", then one line per frame:
// the frame id followed by <dim> decimal floats, comma-separated.
inline FeatureTable load_external_channel(const std::filesystem::path& path,
                                          const ExternalChannelSpec& spec) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open channel file: " + path.string());
  FeatureTable table;
  table.channel_id = spec.channel_id;
  table.dim = spec.dim;

  std::string line;
  if (!std::getline(in, line)) return table;  // empty file: empty table
  {
    std::istringstream header(line);
    std::string name, dim_text;
    if (!std::getline(header, name, ',') || name != "frame_id" || !std::getline(header, dim_text))
      raise(errc::parse_error, "bad channel header in " + path.string());
    size_t parsed = 0;
    try {
      parsed = std::stoul(dim_text);
    } catch (const std::exception&) {
      raise(errc::parse_error, "bad channel dimension in " + path.string());
    }
    if (spec.dim != 0 && parsed != spec.dim)
      raise(errc::dim_mismatch, "channel " + spec.channel_id + " declares dim " +
                                    std::to_string(spec.dim) + " but file header says " +
                                    std::to_string(parsed));
    table.dim = parsed;
  }

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string frame_id;
    std::getline(row, frame_id, ',');
    std::vector<double> values;
    values.reserve(table.dim);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        raise(errc::parse_error,
              path.string() + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (values.size() != table.dim)
      raise(errc::dim_mismatch, "frame " + frame_id + " has " + std::to_string(values.size()) +
                                    " values, expected " + std::to_string(table.dim));
    table.by_frame[frame_id] = std::move(values);
  }
  return table;
}

}  // namespace painreg
