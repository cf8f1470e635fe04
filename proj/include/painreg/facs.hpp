#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "painreg/error.hpp"

namespace painreg {

constexpr int kMaxPainScore = 16;

// Per-frame FACS coding of the pain-related action units. Graded AUs take
// integer intensities 0..5 (FACS letters A-E map to 1-5, absence to 0);
// AU43 (eyes closed) is binary. Any other AUs found in a coding file ride
// along as metadata and never enter the pain score.
struct AuCoding {
  int au4 = 0;
  int au6 = 0;
  int au7 = 0;
  int au9 = 0;
  int au10 = 0;
  int au43 = 0;
  std::map<std::string, double> extra;
};

struct PainScore {
  int value = 0;
};

namespace detail {

inline int checked_graded_intensity(const std::map<std::string, double>& raw,
                                    const std::string& name) {
  auto it = raw.find(name);
  if (it == raw.end()) raise(errc::missing_au, "required AU absent: " + name);
  const double v = it->second;
  if (!(v >= 0.0 && v <= 5.0) || v != std::floor(v))
    raise(errc::out_of_range, name + " intensity must be an integer in [0,5], got " +
                                  std::to_string(v));
  return static_cast<int>(v);
}

}  // namespace detail

inline AuCoding validate_au_coding(const std::map<std::string, double>& raw) {
  AuCoding c;
  c.au4 = detail::checked_graded_intensity(raw, "au4");
  c.au6 = detail::checked_graded_intensity(raw, "au6");
  c.au7 = detail::checked_graded_intensity(raw, "au7");
  c.au9 = detail::checked_graded_intensity(raw, "au9");
  c.au10 = detail::checked_graded_intensity(raw, "au10");
  auto it = raw.find("au43");
  if (it == raw.end()) raise(errc::missing_au, "required AU absent: au43");
  if (it->second != 0.0 && it->second != 1.0)
    raise(errc::out_of_range, "au43 must be 0 or 1, got " + std::to_string(it->second));
  c.au43 = static_cast<int>(it->second);
  for (const auto& [name, value] : raw) {
    if (name != "au4" && name != "au6" && name != "au7" && name != "au9" &&
        name != "au10" && name != "au43")
      c.extra[name] = value;
  }
  return c;
}

// Prkachin-Solomon pain intensity on the 0..16 scale.
inline PainScore compute_pspi(const AuCoding& c) {
  return {c.au4 + std::max(c.au6, c.au7) + std::max(c.au9, c.au10) + c.au43};
}

}  // namespace painreg
