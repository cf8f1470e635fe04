#pragma once

#include <set>
#include <string>
#include <vector>

namespace painreg {

// Records which subjects' data influenced a training artifact. Every trained
// artifact (mean shape, undersample selection, kernel-width choice, model)
// carries one so a fold runner can prove the test subject never leaked in.
struct Provenance {
  std::set<std::string> subjects;

  void add(const std::string& subject) { subjects.insert(subject); }
  void merge(const Provenance& o) { subjects.insert(o.subjects.begin(), o.subjects.end()); }
  bool contains(const std::string& subject) const { return subjects.count(subject) > 0; }
};

struct LeakageAudit {
  int artifacts_checked = 0;
  int violations = 0;
  std::vector<std::string> violation_details;

  void check(const std::string& artifact_name, const Provenance& prov,
             const std::string& excluded_subject) {
    ++artifacts_checked;
    if (prov.contains(excluded_subject)) {
      ++violations;
      violation_details.push_back(artifact_name + " contains test subject " + excluded_subject);
    }
  }
};

}  // namespace painreg
