#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "painreg/error.hpp"
#include "painreg/provenance.hpp"

namespace painreg {

struct FoldPlan {
  // (test subject, training subjects), one fold per subject, ascending order
  std::vector<std::pair<std::string, std::vector<std::string>>> folds;
};

inline FoldPlan loso_folds(std::vector<std::string> subject_ids) {
  std::sort(subject_ids.begin(), subject_ids.end());
  if (std::adjacent_find(subject_ids.begin(), subject_ids.end()) != subject_ids.end())
    raise(errc::insufficient_subjects, "duplicate subject id in fold plan");
  if (subject_ids.size() < 2)
    raise(errc::insufficient_subjects, "leave-one-subject-out needs at least 2 subjects");
  FoldPlan plan;
  for (const auto& test : subject_ids) {
    std::vector<std::string> train;
    for (const auto& s : subject_ids)
      if (s != test) train.push_back(s);
    plan.folds.emplace_back(test, std::move(train));
  }
  return plan;
}

struct Metrics {
  double rmse = 0.0;
  double corr = 0.0;
  bool corr_defined = false;  // false when either side has zero variance
};

inline Metrics compute_metrics(std::span<const double> preds, std::span<const double> truth) {
  if (preds.size() != truth.size())
    raise(errc::dim_mismatch, "prediction/truth lengths differ");
  if (preds.empty()) raise(errc::bad_input, "metrics need at least one sample");
  const double n = static_cast<double>(preds.size());

  double se = 0.0, mp = 0.0, mt = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - truth[i];
    se += d * d;
    mp += preds[i];
    mt += truth[i];
  }
  mp /= n;
  mt /= n;
  double spt = 0.0, spp = 0.0, stt = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    spt += (preds[i] - mp) * (truth[i] - mt);
    spp += (preds[i] - mp) * (preds[i] - mp);
    stt += (truth[i] - mt) * (truth[i] - mt);
  }

  Metrics m;
  m.rmse = std::sqrt(se / n);
  const double denom = std::sqrt(spp * stt);
  if (denom > 0.0) {
    m.corr = spt / denom;
    m.corr_defined = true;
  }
  return m;
}

enum class PostMethod { original, rebased, thresholding, rebased_thresholding };

inline const char* post_method_name(PostMethod m) {
  switch (m) {
    case PostMethod::original: return "original";
    case PostMethod::rebased: return "rebased";
    case PostMethod::thresholding: return "thresholding";
    case PostMethod::rebased_thresholding: return "rebased_thresholding";
  }
  return "unknown";
}

inline PostMethod post_method_from_name(const std::string& name) {
  if (name == "original") return PostMethod::original;
  if (name == "rebased") return PostMethod::rebased;
  if (name == "thresholding") return PostMethod::thresholding;
  if (name == "rebased_thresholding") return PostMethod::rebased_thresholding;
  raise(errc::bad_method, "unknown post-processing method: " + name);
}

constexpr std::array<PostMethod, 4> kAllPostMethods = {
    PostMethod::original, PostMethod::rebased, PostMethod::thresholding,
    PostMethod::rebased_thresholding};

namespace detail {

inline int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

// Mode of the half-up-rounded values; ties resolve to the smaller value.
inline int rounded_mode(std::span<const double> values) {
  std::map<int, size_t> counts;
  for (double v : values) ++counts[round_half_up(v)];
  int mode = 0;
  size_t best = 0;
  for (const auto& [value, count] : counts) {  // ascending keys: first max wins ties
    if (count > best) {
      best = count;
      mode = value;
    }
  }
  return mode;
}

inline double clamp_to_scale(double v) { return std::clamp(v, 0.0, 16.0); }

}  // namespace detail

// Person-specific post-processing of raw predictions for one subject.
// thresholding clamps to the valid pain range; rebasing subtracts the
// subject's modal (rounded) prediction.
inline std::vector<double> postprocess(std::span<const double> subject_preds, PostMethod method) {
  std::vector<double> out(subject_preds.begin(), subject_preds.end());
  switch (method) {
    case PostMethod::original:
      break;
    case PostMethod::thresholding:
      for (double& v : out) v = detail::clamp_to_scale(v);
      break;
    case PostMethod::rebased: {
      const double mode = detail::rounded_mode(subject_preds);
      for (double& v : out) v -= mode;
      break;
    }
    case PostMethod::rebased_thresholding: {
      const double mode = detail::rounded_mode(subject_preds);
      for (double& v : out) v = detail::clamp_to_scale(v - mode);
      break;
    }
  }
  return out;
}

// Streaming variant of rebasing: non-overlapping windows of W frames (final
// partial window allowed), each shifted by its own rounded mode.
inline std::vector<double> sliding_rebase(std::span<const double> stream, int window) {
  if (window < 1) raise(errc::bad_window, "window must be at least 1");
  std::vector<double> out(stream.begin(), stream.end());
  for (size_t start = 0; start < out.size(); start += static_cast<size_t>(window)) {
    const size_t end = std::min(out.size(), start + static_cast<size_t>(window));
    const double mode =
        detail::rounded_mode(std::span<const double>(stream.data() + start, end - start));
    for (size_t i = start; i < end; ++i) out[i] -= mode;
  }
  return out;
}

struct SubjectResult {
  std::string subject_id;
  std::vector<std::string> frame_ids;
  std::vector<double> truth;
  std::vector<double> raw;  // unclamped pipeline predictions
};

struct MethodMetrics {
  PostMethod method = PostMethod::original;
  Metrics concatenated;
  std::vector<std::pair<std::string, Metrics>> per_subject;
};

struct ChannelSetResult {
  std::string set_name;  // e.g. "GF+HOG"
  std::vector<SubjectResult> subjects;
  std::vector<MethodMetrics> methods;
};

struct EvaluationReport {
  std::vector<std::string> method_names;  // evaluation order
  std::vector<ChannelSetResult> sets;
  LeakageAudit audit;
  std::uint64_t seed = 0;
};

// Fills ChannelSetResult::methods from the stored raw predictions: processed
// per subject, metrics per subject and on the concatenation (paper protocol).
inline void score_channel_set(ChannelSetResult& set, const std::vector<PostMethod>& methods) {
  set.methods.clear();
  for (PostMethod method : methods) {
    MethodMetrics mm;
    mm.method = method;
    std::vector<double> all_preds, all_truth;
    for (const auto& subject : set.subjects) {
      const std::vector<double> processed = postprocess(subject.raw, method);
      mm.per_subject.emplace_back(subject.subject_id,
                                  compute_metrics(processed, subject.truth));
      all_preds.insert(all_preds.end(), processed.begin(), processed.end());
      all_truth.insert(all_truth.end(), subject.truth.begin(), subject.truth.end());
    }
    mm.concatenated = compute_metrics(all_preds, all_truth);
    set.methods.push_back(std::move(mm));
  }
}

}  // namespace painreg
