#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "painreg/dataset.hpp"
#include "painreg/facs.hpp"
#include "painreg/image.hpp"
#include "painreg/landmarks.hpp"
#include "painreg/rng.hpp"
#include "painreg/temporal.hpp"

namespace painreg {

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int subjects = 2;
  int sequences_per_subject = 1;
  int frames_per_sequence = 50;
  double zero_fraction = 0.83;            // target share of PSPI-0 frames
  std::vector<double> nonzero_weights;    // pmf over peak levels 1..16; default geometric decay
  int image_size = 128;
};

namespace synth_detail {

// Neutral 66-point template in 128x128 pixel coordinates; jaw 0-16, brows
// 17-26, nose 27-35, eyes 36-47, mouth 48-65.
inline Shape66 face_template() {
  Shape66 p{};
  for (int i = 0; i <= 16; ++i) {
    const double phi = std::numbers::pi * (1.0 - i / 16.0);
    p[static_cast<size_t>(i)] = {64.0 + 42.0 * std::cos(phi), 62.0 + 52.0 * std::sin(phi)};
  }
  const std::array<double, 5> arch = {0.0, 2.5, 4.0, 2.5, 0.5};
  for (int i = 0; i < 5; ++i) {
    p[static_cast<size_t>(17 + i)] = {34.0 + 6.0 * i, 46.0 - arch[static_cast<size_t>(i)]};
    p[static_cast<size_t>(22 + i)] = {70.0 + 6.0 * i, 46.0 - arch[static_cast<size_t>(4 - i)]};
  }
  p[27] = {64, 52};
  p[28] = {64, 60};
  p[29] = {64, 68};
  p[30] = {64, 76};
  p[31] = {54, 84};
  p[32] = {59, 86};
  p[33] = {64, 87};
  p[34] = {69, 86};
  p[35] = {74, 84};
  p[36] = {35, 58};
  p[37] = {41, 54.5};
  p[38] = {48, 54.5};
  p[39] = {54, 58};
  p[40] = {48, 61.5};
  p[41] = {41, 61.5};
  p[42] = {74, 58};
  p[43] = {80, 54.5};
  p[44] = {87, 54.5};
  p[45] = {93, 58};
  p[46] = {87, 61.5};
  p[47] = {80, 61.5};
  p[48] = {46, 96};
  p[49] = {52, 91};
  p[50] = {58, 89};
  p[51] = {64, 88};
  p[52] = {70, 89};
  p[53] = {76, 91};
  p[54] = {82, 96};
  p[55] = {76, 101};
  p[56] = {70, 103};
  p[57] = {64, 104};
  p[58] = {58, 103};
  p[59] = {52, 101};
  p[60] = {51, 96};
  p[61] = {58, 93};
  p[62] = {64, 92.5};
  p[63] = {70, 93};
  p[64] = {77, 96};
  p[65] = {64, 99};
  return p;
}

// Linear displacement fields per PSPI component: brow lowering (AU4), eye
// closure (max(AU6,AU7) and AU43), upper-lip/nose raise (max(AU9,AU10)).
inline void apply_pain_deformation(Shape66& p, const AuCoding& au) {
  const double a4 = au.au4;
  const double m67 = std::max(au.au6, au.au7);
  const double m910 = std::max(au.au9, au.au10);

  for (int i = 17; i <= 21; ++i) {
    p[static_cast<size_t>(i)].y += 1.1 * a4;
    p[static_cast<size_t>(i)].x += 0.4 * a4;
  }
  for (int i = 22; i <= 26; ++i) {
    p[static_cast<size_t>(i)].y += 1.1 * a4;
    p[static_cast<size_t>(i)].x -= 0.4 * a4;
  }

  const double closure = std::min(3.5, 0.45 * m67 + 3.5 * au.au43);
  for (int i : {37, 38, 43, 44}) p[static_cast<size_t>(i)].y += closure;
  for (int i : {40, 41, 46, 47}) p[static_cast<size_t>(i)].y -= closure;

  for (int i = 49; i <= 53; ++i) p[static_cast<size_t>(i)].y -= 0.8 * m910;
  for (int i : {61, 62, 63}) p[static_cast<size_t>(i)].y -= 0.7 * m910;
  for (int i = 31; i <= 35; ++i) p[static_cast<size_t>(i)].y -= 0.35 * m910;
  p[31].x -= 0.3 * m910;
  p[35].x += 0.3 * m910;
  p[48].y -= 0.2 * m910;
  p[54].y -= 0.2 * m910;
}

// Splits a latent level into a valid coding with compute_pspi == level.
inline AuCoding decompose_level(int level, Rng& rng) {
  AuCoding au;
  int rem = level;
  if (rem == 16)
    au.au43 = 1;
  else if (rem >= 1 && uniform01(rng) < 0.10)
    au.au43 = 1;
  rem -= au.au43;

  std::array<int, 3> order = {0, 1, 2};
  for (int i = 2; i > 0; --i)
    std::swap(order[static_cast<size_t>(i)],
              order[static_cast<size_t>(bounded_uint(rng, static_cast<std::uint64_t>(i) + 1))]);
  std::array<int, 3> amount = {0, 0, 0};
  for (int k : order) {
    amount[static_cast<size_t>(k)] = std::min(5, rem);
    rem -= amount[static_cast<size_t>(k)];
  }
  au.au4 = amount[0];
  const int m67 = amount[1];
  const int m910 = amount[2];
  if (bounded_uint(rng, 2) == 0) {
    au.au6 = m67;
    au.au7 = m67 == 0 ? 0 : static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(m67) + 1));
  } else {
    au.au7 = m67;
    au.au6 = m67 == 0 ? 0 : static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(m67) + 1));
  }
  if (bounded_uint(rng, 2) == 0) {
    au.au9 = m910;
    au.au10 = m910 == 0 ? 0 : static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(m910) + 1));
  } else {
    au.au10 = m910;
    au.au9 = m910 == 0 ? 0 : static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(m910) + 1));
  }
  if (uniform01(rng) < 0.15) au.extra["au25"] = static_cast<double>(bounded_uint(rng, 3));
  return au;
}

inline void fill_hull(GrayImage& img, const std::vector<Vec2>& hull, std::uint8_t value) {
  if (hull.size() < 3) return;
  double min_x = hull[0].x, max_x = hull[0].x, min_y = hull[0].y, max_y = hull[0].y;
  for (const auto& p : hull) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(min_x)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(max_x)));
  const int y0 = std::max(0, static_cast<int>(std::floor(min_y)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(max_y)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (point_in_convex_polygon(hull, {x + 0.5, y + 0.5})) img.at(x, y) = value;
}

inline void draw_chain(GrayImage& img, const std::vector<Vec2>& pts, double width,
                       std::uint8_t value) {
  auto dist_to_segment = [](const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    const double t = len2 < 1e-12 ? 0.0 : std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
  };
  for (size_t s = 0; s + 1 < pts.size(); ++s) {
    const Vec2 a = pts[s], b = pts[s + 1];
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - width - 1)));
    const int x1 =
        std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + width + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - width - 1)));
    const int y1 =
        std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + width + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (dist_to_segment({x + 0.5, y + 0.5}, a, b) <= width) img.at(x, y) = value;
  }
}

inline void fill_disk(GrayImage& img, const Vec2& center, double radius, std::uint8_t value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(center.x - radius)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(center.x + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(center.y - radius)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(center.y + radius)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((Vec2{x + 0.5, y + 0.5} - center).norm() <= radius) img.at(x, y) = value;
}

inline GrayImage box_blur3(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      int sum = 0, count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= img.width() || yy >= img.height()) continue;
          sum += img.at(xx, yy);
          ++count;
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(sum / count);
    }
  }
  return out;
}

inline GrayImage render_face(const Shape66& pts, int size, const LandmarkScheme& scheme) {
  GrayImage img(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(x, y) = static_cast<std::uint8_t>(38 + (y * 24) / size);

  std::vector<Vec2> outline;
  for (int i = 0; i <= 16; ++i) outline.push_back(pts[static_cast<size_t>(i)]);
  for (int i : scheme.brow_left) outline.push_back(pts[static_cast<size_t>(i)]);
  for (int i : scheme.brow_right) outline.push_back(pts[static_cast<size_t>(i)]);
  const std::vector<Vec2> face_hull = convex_hull(outline);
  if (face_hull.size() >= 3) {
    Vec2 center{0, 0};
    for (const auto& p : face_hull) center += p;
    center = center / static_cast<double>(face_hull.size());
    double min_x = face_hull[0].x, max_x = min_x, min_y = face_hull[0].y, max_y = min_y;
    for (const auto& p : face_hull) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const int x0 = std::max(0, static_cast<int>(min_x)),
              x1 = std::min(size - 1, static_cast<int>(max_x));
    const int y0 = std::max(0, static_cast<int>(min_y)),
              y1 = std::min(size - 1, static_cast<int>(max_y));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p{x + 0.5, y + 0.5};
        if (!point_in_convex_polygon(face_hull, p)) continue;
        const double shade = 192.0 - 0.55 * (p - center).norm();
        img.at(x, y) = static_cast<std::uint8_t>(std::clamp(shade, 120.0, 200.0));
      }
    }
  }

  auto chain_points = [&](const std::vector<int>& idx) {
    std::vector<Vec2> v;
    for (int i : idx) v.push_back(pts[static_cast<size_t>(i)]);
    return v;
  };
  draw_chain(img, chain_points(scheme.nose), 1.6, 140);
  draw_chain(img, chain_points(scheme.brow_left), 2.2, 70);
  draw_chain(img, chain_points(scheme.brow_right), 2.2, 70);

  for (const auto* eye : {&scheme.eye_left, &scheme.eye_right}) {
    fill_hull(img, convex_hull(chain_points(*eye)), 205);
    fill_disk(img, eye_center(pts, *eye), 2.8, 35);
  }
  fill_hull(img, convex_hull(chain_points(scheme.mouth_outer)), 105);
  fill_hull(img, convex_hull(chain_points(scheme.mouth_inner)), 55);
  return box_blur3(img);
}

// Per-sequence pain track: one contiguous episode ramping up to a sampled
// peak and back, sized so the sequence hits the target zero fraction.
inline std::vector<int> pain_track(int frames, double zero_fraction,
                                   const std::vector<double>& weights, Rng& rng) {
  std::vector<int> levels(static_cast<size_t>(frames), 0);
  const int nonzero =
      static_cast<int>(std::llround((1.0 - zero_fraction) * static_cast<double>(frames)));
  if (nonzero <= 0) return levels;

  double total = 0.0;
  for (double w : weights) total += w;
  double pick = uniform01(rng) * total;
  int peak = 1;
  for (size_t i = 0; i < weights.size(); ++i) {
    pick -= weights[i];
    if (pick <= 0.0) {
      peak = static_cast<int>(i) + 1;
      break;
    }
  }

  const int start =
      static_cast<int>(bounded_uint(rng, static_cast<std::uint64_t>(frames - nonzero) + 1));
  for (int k = 0; k < nonzero; ++k) {
    const double rise = nonzero == 1 ? 1.0
                                     : 1.0 - std::abs(2.0 * k / (nonzero - 1.0) - 1.0);
    levels[static_cast<size_t>(start + k)] =
        std::max(1, static_cast<int>(std::llround(rise * peak)));
  }
  return levels;
}

}  // namespace synth_detail

// Writes <subject>/<sequence>/<frame>.{pgm,pts,au} plus manifest.json.
// Bit-reproducible for a given spec.
inline DatasetManifest generate_synthetic(const SyntheticSpec& spec,
                                          const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) raise(errc::io_error, "cannot create output directory: " + out_dir.string());

  std::vector<double> weights = spec.nonzero_weights;
  if (weights.empty()) {
    weights.resize(16);
    double w = 1.0;
    for (size_t i = 0; i < weights.size(); ++i, w *= 0.62) weights[i] = w;
  }
  if (weights.size() != 16) raise(errc::bad_config, "nonzero level pmf needs 16 entries");

  const LandmarkScheme scheme = LandmarkScheme::standard();
  const Shape66 base = synth_detail::face_template();
  DatasetManifest manifest;
  manifest.root = out_dir;

  for (int s = 0; s < spec.subjects; ++s) {
    SubjectRecord subject;
    char sid[16];
    std::snprintf(sid, sizeof sid, "s%02d", s + 1);
    subject.subject_id = sid;

    Rng subject_rng = make_rng(mix_seed(spec.seed, static_cast<std::uint64_t>(s), 0x5551));
    Shape66 identity = base;
    const double face_scale = uniform_in(subject_rng, 0.94, 1.06);
    for (auto& p : identity) {
      p = Vec2{64.0, 62.0} + (p - Vec2{64.0, 62.0}) * face_scale;
      p.x += normal01(subject_rng) * 1.2;
      p.y += normal01(subject_rng) * 1.2;
    }

    for (int q = 0; q < spec.sequences_per_subject; ++q) {
      SequenceRecord seq;
      char qid[16];
      std::snprintf(qid, sizeof qid, "q%02d", q + 1);
      seq.sequence_id = qid;
      const fs::path seq_dir = out_dir / subject.subject_id / seq.sequence_id;
      fs::create_directories(seq_dir, ec);
      if (ec) raise(errc::io_error, "cannot create sequence directory: " + seq_dir.string());

      Rng rng = make_rng(
          mix_seed(spec.seed, static_cast<std::uint64_t>(s) * 1000 + static_cast<std::uint64_t>(q), 0xFACE));
      const std::vector<int> track =
          synth_detail::pain_track(spec.frames_per_sequence, spec.zero_fraction, weights, rng);

      for (int t = 0; t < spec.frames_per_sequence; ++t) {
        char fid[32];
        std::snprintf(fid, sizeof fid, "%s%sf%03d", sid, qid, t);

        const AuCoding au = synth_detail::decompose_level(track[static_cast<size_t>(t)], rng);
        Shape66 pts = identity;
        synth_detail::apply_pain_deformation(pts, au);

        SimilarityTransform jitter;
        jitter.scale = uniform_in(rng, 0.97, 1.03);
        jitter.rotation = uniform_in(rng, -0.05, 0.05);
        jitter.translation = {uniform_in(rng, -4.0, 4.0), uniform_in(rng, -4.0, 4.0)};
        const Vec2 pivot{64.0, 62.0};
        for (auto& p : pts) {
          p = jitter.apply(p - pivot) + pivot;
          p.x += normal01(rng) * 0.3;
          p.y += normal01(rng) * 0.3;
        }

        const GrayImage img = synth_detail::render_face(pts, spec.image_size, scheme);

        FrameRecord record;
        record.frame_id = fid;
        const fs::path rel = fs::path(subject.subject_id) / seq.sequence_id;
        record.image = rel / (std::string(fid) + ".pgm");
        record.landmarks = rel / (std::string(fid) + ".pts");
        record.au_coding = rel / (std::string(fid) + ".au");
        write_pgm(img, out_dir / record.image);
        write_landmark_file(out_dir / record.landmarks, pts);
        write_au_file(out_dir / record.au_coding, au);
        seq.frames.push_back(std::move(record));
      }
      subject.sequences.push_back(std::move(seq));
    }
    manifest.subjects.push_back(std::move(subject));
  }
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace painreg
