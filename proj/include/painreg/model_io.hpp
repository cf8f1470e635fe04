#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include <Eigen/Dense>

#include "painreg/error.hpp"
#include "painreg/fusion.hpp"
#include "painreg/rvm.hpp"
#include "painreg/text.hpp"

namespace painreg {

// JSON model files. nlohmann emits shortest-round-trip doubles, so identical
// models serialize to identical bytes and reload losslessly.

constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& data = j.at("data");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index jj = 0; jj < m.cols(); ++jj)
      m(i, jj) = data.at(static_cast<size_t>(i)).at(static_cast<size_t>(jj)).get<double>();
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<size_t>(i)).get<double>();
  return v;
}

}  // namespace detail

inline nlohmann::json to_json(const Provenance& p) {
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : p.subjects) subjects.push_back(s);
  return subjects;
}

inline Provenance provenance_from_json(const nlohmann::json& j) {
  Provenance p;
  for (const auto& s : j) p.add(s.get<std::string>());
  return p;
}

inline nlohmann::json to_json(const RvmModel& m) {
  return nlohmann::json{
      {"kernel",
       {{"kind", kernel_kind_name(m.kernel.kind)},
        {"gamma", m.kernel.gamma},
        {"include_bias", m.kernel.include_bias}}},
      {"standardizer",
       {{"mean", detail::vector_to_json(m.standardizer.mean)},
        {"scale", detail::vector_to_json(m.standardizer.scale)}}},
      {"relevance_vectors", detail::matrix_to_json(m.relevance_vectors)},
      {"rv_training_indices", m.rv_training_indices},
      {"bias_active", m.bias_active},
      {"weights", detail::vector_to_json(m.weights)},
      {"alpha", detail::vector_to_json(m.alpha)},
      {"posterior_cov", detail::matrix_to_json(m.posterior_cov)},
      {"sigma2", m.sigma2},
      {"degenerate", m.degenerate},
      {"provenance", to_json(m.provenance)}};
}

inline RvmModel rvm_model_from_json(const nlohmann::json& j) {
  RvmModel m;
  m.kernel.kind = kernel_kind_from_name(j.at("kernel").at("kind").get<std::string>());
  m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
  m.kernel.include_bias = j.at("kernel").at("include_bias").get<bool>();
  m.standardizer.mean = detail::vector_from_json(j.at("standardizer").at("mean"));
  m.standardizer.scale = detail::vector_from_json(j.at("standardizer").at("scale"));
  m.relevance_vectors = detail::matrix_from_json(j.at("relevance_vectors"));
  m.rv_training_indices = j.at("rv_training_indices").get<std::vector<int>>();
  m.bias_active = j.at("bias_active").get<bool>();
  m.weights = detail::vector_from_json(j.at("weights"));
  m.alpha = detail::vector_from_json(j.at("alpha"));
  m.posterior_cov = detail::matrix_from_json(j.at("posterior_cov"));
  m.sigma2 = j.at("sigma2").get<double>();
  m.degenerate = j.at("degenerate").get<bool>();
  m.provenance = provenance_from_json(j.at("provenance"));
  return m;
}

inline nlohmann::json to_json(const FusionModel& f) {
  nlohmann::json channel_models = nlohmann::json::object();
  for (const auto& [channel, model] : f.channel_models) channel_models[channel] = to_json(model);
  return nlohmann::json{{"format_version", kModelFormatVersion},
                        {"channels", f.channels},
                        {"channel_models", std::move(channel_models)},
                        {"chosen_gammas", f.chosen_gammas},
                        {"second_level", to_json(f.second_level)},
                        {"warnings", f.warnings},
                        {"provenance", to_json(f.provenance)}};
}

inline FusionModel fusion_model_from_json(const nlohmann::json& j) {
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    raise(errc::parse_error, "unsupported model format version " + std::to_string(version));
  FusionModel f;
  f.channels = j.at("channels").get<std::vector<std::string>>();
  for (const auto& [channel, jm] : j.at("channel_models").items())
    f.channel_models[channel] = rvm_model_from_json(jm);
  f.chosen_gammas = j.at("chosen_gammas").get<std::map<std::string, double>>();
  f.second_level = rvm_model_from_json(j.at("second_level"));
  f.warnings = j.at("warnings").get<std::vector<std::string>>();
  f.provenance = provenance_from_json(j.at("provenance"));
  return f;
}

inline void save_fusion_model(const FusionModel& f, const std::filesystem::path& path) {
  write_text_file(path, to_json(f).dump(2) + "\n");
}

inline FusionModel load_fusion_model(const std::filesystem::path& path) {
  try {
    return fusion_model_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
}

inline void save_rvm_model(const RvmModel& m, const std::filesystem::path& path) {
  nlohmann::json j = to_json(m);
  j["format_version"] = kModelFormatVersion;
  write_text_file(path, j.dump(2) + "\n");
}

inline RvmModel load_rvm_model(const std::filesystem::path& path) {
  try {
    return rvm_model_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
}

}  // namespace painreg
