#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "painreg/error.hpp"
#include "painreg/provenance.hpp"
#include "painreg/rng.hpp"
#include "painreg/rvm.hpp"

namespace painreg {

// Training-set rebalancing: keep every non-zero-pain frame and at most
// ratio * (count of the most frequent non-zero level) zero-pain frames,
// sampled uniformly without replacement. Never applied to test data.
struct UndersampleResult {
  std::vector<std::size_t> retained;  // ascending indices into the input
  bool low_support_warning = false;   // no non-zero frames; fell back to the floor
  Provenance provenance;
};

inline UndersampleResult undersample_zero_frames(const std::vector<int>& pspi_labels,
                                                 double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0)) raise(errc::bad_input, "undersample ratio must be positive");
  std::map<int, std::size_t> histogram;
  std::vector<std::size_t> zeros;
  UndersampleResult result;
  for (std::size_t i = 0; i < pspi_labels.size(); ++i) {
    if (pspi_labels[i] == 0)
      zeros.push_back(i);
    else {
      ++histogram[pspi_labels[i]];
      result.retained.push_back(i);
    }
  }
  std::size_t mode_count = 0;
  for (const auto& [level, count] : histogram) mode_count = std::max(mode_count, count);

  std::size_t keep = 0;
  if (mode_count == 0) {
    keep = std::min<std::size_t>(100, zeros.size());  // label-free floor
    result.low_support_warning = true;
  } else {
    keep = std::min(static_cast<std::size_t>(ratio * static_cast<double>(mode_count)),
                    zeros.size());
  }
  Rng rng = make_rng(seed);
  for (std::size_t pick : sample_without_replacement(rng, zeros.size(), keep))
    result.retained.push_back(zeros[pick]);
  std::sort(result.retained.begin(), result.retained.end());
  return result;
}

struct FusionOptions {
  std::vector<double> gamma_grid = {0.5, 1.0, 2.0, 4.0};  // multiples of the median distance
  KernelKind channel_kernel = KernelKind::rbf;
  KernelKind second_level_kernel = KernelKind::rbf;
  RvmTrainOptions rvm;
};

struct ChannelTrainResult {
  RvmModel model;
  double chosen_gamma = 0.0;
  double chosen_multiplier = 0.0;
  double inner_rmse = 0.0;
  Eigen::VectorXd oof_predictions;  // out-of-fold, aligned with the training rows
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::vector<Eigen::Index>> rows_by_subject(
    const std::vector<std::string>& subjects, std::vector<std::string>& subject_order) {
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < subjects.size(); ++i)
    groups[subjects[i]].push_back(static_cast<Eigen::Index>(i));
  std::vector<std::vector<Eigen::Index>> out;
  subject_order.clear();
  for (auto& [subject, rows] : groups) {
    subject_order.push_back(subject);
    out.push_back(std::move(rows));
  }
  return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X,
                                 const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

inline double rmse_of(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

}  // namespace detail

// Kernel width by inner leave-one-subject-out over the training subjects:
// every grid multiple of the median pairwise distance is scored by the RMSE
// of concatenated inner-fold predictions; ties go to the smaller width. The
// winning width's inner-fold predictions double as the out-of-fold inputs for
// stacking, and the returned model is retrained on all rows.
inline ChannelTrainResult train_channel_regressor(const Eigen::MatrixXd& X,
                                                  const Eigen::VectorXd& y,
                                                  const std::vector<std::string>& subjects,
                                                  const FusionOptions& opts = {}) {
  if (static_cast<Eigen::Index>(subjects.size()) != X.rows())
    raise(errc::dim_mismatch, "one subject id per training row required");

  ChannelTrainResult result;
  const double med = opts.channel_kernel == KernelKind::rbf
                         ? median_heuristic_gamma(Standardizer::fit(X).apply(X))
                         : 1.0;

  std::vector<std::string> subject_order;
  const auto groups = detail::rows_by_subject(subjects, subject_order);

  if (groups.size() < 2) {
    // inner loop infeasible: median-heuristic fallback, in-sample stack inputs
    result.warnings.push_back(
        "inner_loop_infeasible: single training subject; using median-heuristic width");
    KernelSpec spec{opts.channel_kernel, med, true};
    result.model = rvm_train(X, y, spec, opts.rvm);
    result.chosen_gamma = spec.gamma;
    result.chosen_multiplier = 1.0;
    result.oof_predictions = rvm_predict(result.model, X).mean;
    for (const auto& s : subjects) result.model.provenance.add(s);
    return result;
  }

  std::vector<double> grid = opts.gamma_grid;
  if (opts.channel_kernel == KernelKind::linear) grid = {1.0};  // width-free kernel
  std::sort(grid.begin(), grid.end());
  double best_rmse = std::numeric_limits<double>::infinity();
  double best_multiplier = grid.front();
  Eigen::VectorXd best_oof;

  for (double multiplier : grid) {
    const KernelSpec spec{opts.channel_kernel, multiplier * med, true};
    Eigen::VectorXd oof = Eigen::VectorXd::Zero(X.rows());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<Eigen::Index> train_rows;
      for (std::size_t h = 0; h < groups.size(); ++h)
        if (h != g) train_rows.insert(train_rows.end(), groups[h].begin(), groups[h].end());
      const RvmModel fold_model =
          rvm_train(detail::take_rows(X, train_rows), detail::take(y, train_rows), spec, opts.rvm);
      const Eigen::VectorXd pred =
          rvm_predict(fold_model, detail::take_rows(X, groups[g])).mean;
      for (std::size_t i = 0; i < groups[g].size(); ++i) oof[groups[g][i]] = pred[static_cast<Eigen::Index>(i)];
    }
    const double rmse = detail::rmse_of(oof, y);
    if (rmse < best_rmse - 1e-12) {  // strict improvement; ties keep the smaller width
      best_rmse = rmse;
      best_multiplier = multiplier;
      best_oof = oof;
    }
  }

  const KernelSpec chosen{opts.channel_kernel, best_multiplier * med, true};
  result.model = rvm_train(X, y, chosen, opts.rvm);
  result.chosen_gamma = chosen.gamma;
  result.chosen_multiplier = best_multiplier;
  result.inner_rmse = best_rmse;
  result.oof_predictions = best_oof;
  for (const auto& s : subjects) result.model.provenance.add(s);
  return result;
}

struct FusionModel {
  std::vector<std::string> channels;           // fixed stacking order
  std::map<std::string, RvmModel> channel_models;
  std::map<std::string, double> chosen_gammas;
  RvmModel second_level;
  Provenance provenance;
  std::vector<std::string> warnings;
};

// Two-level stacking: per-channel regressors, their out-of-fold predictions
// stacked as an n-channel vector, and a second-level regressor on the stack.
inline FusionModel train_fusion(const std::map<std::string, Eigen::MatrixXd>& channel_features,
                                const std::vector<std::string>& channel_order,
                                const Eigen::VectorXd& y,
                                const std::vector<std::string>& subjects,
                                const FusionOptions& opts = {}) {
  if (channel_order.empty()) raise(errc::bad_config, "fusion needs at least one channel");
  FusionModel fusion;
  fusion.channels = channel_order;

  Eigen::MatrixXd stacked(y.size(), static_cast<Eigen::Index>(channel_order.size()));
  for (std::size_t c = 0; c < channel_order.size(); ++c) {
    const auto it = channel_features.find(channel_order[c]);
    if (it == channel_features.end())
      raise(errc::missing_frames, "channel " + channel_order[c] + " has no training features");
    if (it->second.rows() != y.size())
      raise(errc::dim_mismatch, "channel " + channel_order[c] + " row count mismatch");
    ChannelTrainResult trained = train_channel_regressor(it->second, y, subjects, opts);
    stacked.col(static_cast<Eigen::Index>(c)) = trained.oof_predictions;
    fusion.chosen_gammas[channel_order[c]] = trained.chosen_gamma;
    fusion.warnings.insert(fusion.warnings.end(), trained.warnings.begin(),
                           trained.warnings.end());
    fusion.channel_models[channel_order[c]] = std::move(trained.model);
  }

  KernelSpec second{opts.second_level_kernel, 1.0, true};
  if (second.kind == KernelKind::rbf)
    second.gamma = median_heuristic_gamma(Standardizer::fit(stacked).apply(stacked));
  fusion.second_level = rvm_train(stacked, y, second, opts.rvm);
  for (const auto& s : subjects) {
    fusion.second_level.provenance.add(s);
    fusion.provenance.add(s);
  }
  return fusion;
}

// Channel predictions r_1..r_n then the second-level mean; unclamped reals.
inline Eigen::VectorXd predict_fusion(const FusionModel& fusion,
                                      const std::map<std::string, Eigen::MatrixXd>& channel_features) {
  Eigen::Index rows = -1;
  for (const auto& channel : fusion.channels) {
    const auto it = channel_features.find(channel);
    if (it == channel_features.end())
      raise(errc::missing_frames, "channel " + channel + " missing from prediction input");
    if (rows < 0) rows = it->second.rows();
    if (it->second.rows() != rows)
      raise(errc::dim_mismatch, "channels disagree on the number of query frames");
  }
  Eigen::MatrixXd stacked(rows, static_cast<Eigen::Index>(fusion.channels.size()));
  for (std::size_t c = 0; c < fusion.channels.size(); ++c) {
    const RvmModel& model = fusion.channel_models.at(fusion.channels[c]);
    stacked.col(static_cast<Eigen::Index>(c)) =
        rvm_predict(model, channel_features.at(fusion.channels[c])).mean;
  }
  return rvm_predict(fusion.second_level, stacked).mean;
}

}  // namespace painreg
