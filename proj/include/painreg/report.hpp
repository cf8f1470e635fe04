#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "painreg/error.hpp"
#include "painreg/evaluation.hpp"
#include "painreg/text.hpp"

namespace painreg {

// Report emission: a Table-II-style method x channel-set comparison, one
// RMSE-vs-CORR scatter file per (set, method), and a machine-readable
// summary.json from which `report` can re-render everything byte-identically.

namespace detail {

inline std::string metric_csv(const Metrics& m) {
  return format_g6(m.rmse) + "," + (m.corr_defined ? format_g6(m.corr) : std::string("NA"));
}

}  // namespace detail

inline std::string comparison_csv(const EvaluationReport& report) {
  std::string out = "method";
  for (const auto& set : report.sets) out += ",rmse_" + set.set_name;
  for (const auto& set : report.sets) out += ",corr_" + set.set_name;
  out += "\n";
  for (size_t mi = 0; mi < report.method_names.size(); ++mi) {
    out += report.method_names[mi];
    for (const auto& set : report.sets) out += "," + format_g6(set.methods[mi].concatenated.rmse);
    for (const auto& set : report.sets) {
      const Metrics& m = set.methods[mi].concatenated;
      out += ",";
      out += m.corr_defined ? format_g6(m.corr) : "NA";
    }
    out += "\n";
  }
  return out;
}

inline std::string scatter_csv(const MethodMetrics& mm) {
  std::string out = "subject_id,rmse,corr\n";
  for (const auto& [subject, metrics] : mm.per_subject)
    out += subject + "," + detail::metric_csv(metrics) + "\n";
  return out;
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  return nlohmann::json{{"rmse", m.rmse}, {"corr", m.corr}, {"corr_defined", m.corr_defined}};
}

inline Metrics metrics_from_json(const nlohmann::json& j) {
  Metrics m;
  m.rmse = j.at("rmse").get<double>();
  m.corr = j.at("corr").get<double>();
  m.corr_defined = j.at("corr_defined").get<bool>();
  return m;
}

inline nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& set : report.sets) {
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& s : set.subjects)
      subjects.push_back({{"subject_id", s.subject_id},
                          {"frame_ids", s.frame_ids},
                          {"truth", s.truth},
                          {"raw", s.raw}});
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& mm : set.methods) {
      nlohmann::json per_subject = nlohmann::json::array();
      for (const auto& [subject, metrics] : mm.per_subject)
        per_subject.push_back({{"subject_id", subject}, {"metrics", metrics_to_json(metrics)}});
      methods.push_back({{"method", post_method_name(mm.method)},
                         {"concatenated", metrics_to_json(mm.concatenated)},
                         {"per_subject", std::move(per_subject)}});
    }
    sets.push_back({{"set_name", set.set_name},
                    {"subjects", std::move(subjects)},
                    {"methods", std::move(methods)}});
  }
  return nlohmann::json{{"format_version", 1},
                        {"seed", report.seed},
                        {"methods", report.method_names},
                        {"sets", std::move(sets)},
                        {"leakage_audit",
                         {{"artifacts_checked", report.audit.artifacts_checked},
                          {"violations", report.audit.violations},
                          {"details", report.audit.violation_details}}}};
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
  EvaluationReport report;
  report.seed = j.at("seed").get<std::uint64_t>();
  report.method_names = j.at("methods").get<std::vector<std::string>>();
  for (const auto& js : j.at("sets")) {
    ChannelSetResult set;
    set.set_name = js.at("set_name").get<std::string>();
    for (const auto& jsub : js.at("subjects")) {
      SubjectResult s;
      s.subject_id = jsub.at("subject_id").get<std::string>();
      s.frame_ids = jsub.at("frame_ids").get<std::vector<std::string>>();
      s.truth = jsub.at("truth").get<std::vector<double>>();
      s.raw = jsub.at("raw").get<std::vector<double>>();
      set.subjects.push_back(std::move(s));
    }
    for (const auto& jm : js.at("methods")) {
      MethodMetrics mm;
      mm.method = post_method_from_name(jm.at("method").get<std::string>());
      mm.concatenated = metrics_from_json(jm.at("concatenated"));
      for (const auto& jp : jm.at("per_subject"))
        mm.per_subject.emplace_back(jp.at("subject_id").get<std::string>(),
                                    metrics_from_json(jp.at("metrics")));
      set.methods.push_back(std::move(mm));
    }
    report.sets.push_back(std::move(set));
  }
  report.audit.artifacts_checked = j.at("leakage_audit").at("artifacts_checked").get<int>();
  report.audit.violations = j.at("leakage_audit").at("violations").get<int>();
  report.audit.violation_details =
      j.at("leakage_audit").at("details").get<std::vector<std::string>>();
  return report;
}

inline void emit_report(const EvaluationReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(errc::io_error, "cannot create report directory: " + out_dir.string());

  write_text_file(out_dir / "comparison.csv", comparison_csv(report));
  for (const auto& set : report.sets)
    for (const auto& mm : set.methods)
      write_text_file(
          out_dir / ("scatter_" + set.set_name + "_" + post_method_name(mm.method) + ".csv"),
          scatter_csv(mm));
  write_text_file(out_dir / "summary.json", report_to_json(report).dump(2) + "\n");
}

inline EvaluationReport load_report(const std::filesystem::path& summary_path) {
  try {
    return report_from_json(nlohmann::json::parse(read_text_file(summary_path)));
  } catch (const nlohmann::json::exception& e) {
    raise(errc::parse_error, summary_path.string() + ": " + e.what());
  }
}

}  // namespace painreg
