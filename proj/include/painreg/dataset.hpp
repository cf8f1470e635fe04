#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "painreg/error.hpp"
#include "painreg/facs.hpp"
#include "painreg/image.hpp"
#include "painreg/landmarks.hpp"
#include "painreg/temporal.hpp"
#include "painreg/text.hpp"

namespace painreg {

struct FrameRecord {
  std::string frame_id;
  std::filesystem::path image;      // relative to the manifest
  std::filesystem::path landmarks;  // 66 lines of "x y"
  std::filesystem::path au_coding;  // lines of "AUname intensity"
};

struct SequenceRecord {
  std::string sequence_id;
  std::vector<FrameRecord> frames;
};

struct SubjectRecord {
  std::string subject_id;
  std::vector<SequenceRecord> sequences;
};

struct DatasetManifest {
  std::filesystem::path root;  // directory the manifest lives in
  std::vector<SubjectRecord> subjects;
};

inline LandmarkFrame parse_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open landmark file: " + path.string());
  LandmarkFrame frame;
  std::string line;
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (count >= kNumLandmarks)
      raise(errc::parse_error, path.string() + ": more than 66 landmark lines");
    std::istringstream row(line);
    std::string xs, ys;
    if (!(row >> xs >> ys))
      raise(errc::parse_error,
            path.string() + ":" + std::to_string(count + 1) + ": expected 'x y'");
    frame.points[static_cast<size_t>(count)] = {parse_double(xs, path.string()),
                                                parse_double(ys, path.string())};
    ++count;
  }
  if (count != kNumLandmarks)
    raise(errc::parse_error,
          path.string() + ": expected 66 landmark lines, found " + std::to_string(count));
  validate_landmarks(frame.points);
  return frame;
}

inline void write_landmark_file(const std::filesystem::path& path, const Shape66& points) {
  std::string out;
  for (const auto& p : points)
    out += format_fixed(p.x, 6) + " " + format_fixed(p.y, 6) + "\n";
  write_text_file(path, out);
}

inline AuCoding parse_au_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open AU file: " + path.string());
  std::map<std::string, double> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string name, value;
    if (!(row >> name >> value))
      raise(errc::parse_error,
            path.string() + ":" + std::to_string(line_no) + ": expected 'AUname intensity'");
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    raw[name] = parse_double(value, path.string());
  }
  try {
    return validate_au_coding(raw);
  } catch (const Error& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
}

inline void write_au_file(const std::filesystem::path& path, const AuCoding& coding) {
  std::string out;
  out += "au4 " + std::to_string(coding.au4) + "\n";
  out += "au6 " + std::to_string(coding.au6) + "\n";
  out += "au7 " + std::to_string(coding.au7) + "\n";
  out += "au9 " + std::to_string(coding.au9) + "\n";
  out += "au10 " + std::to_string(coding.au10) + "\n";
  out += "au43 " + std::to_string(coding.au43) + "\n";
  for (const auto& [name, value] : coding.extra)
    out += name + " " + format_fixed(value, 0) + "\n";
  write_text_file(path, out);
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    raise(errc::io_error, "manifest not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.root = path.parent_path();
  try {
    for (const auto& js : j.at("subjects")) {
      SubjectRecord subject;
      subject.subject_id = js.at("subject_id").get<std::string>();
      for (const auto& jq : js.at("sequences")) {
        SequenceRecord seq;
        seq.sequence_id = jq.at("sequence_id").get<std::string>();
        for (const auto& jf : jq.at("frames")) {
          FrameRecord f;
          f.frame_id = jf.at("frame_id").get<std::string>();
          f.image = jf.at("image").get<std::string>();
          f.landmarks = jf.at("landmarks").get<std::string>();
          f.au_coding = jf.at("au").get<std::string>();
          seq.frames.push_back(std::move(f));
        }
        subject.sequences.push_back(std::move(seq));
      }
      m.subjects.push_back(std::move(subject));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(errc::parse_error, path.string() + ": " + e.what());
  }
  return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : m.subjects) {
    nlohmann::json sequences = nlohmann::json::array();
    for (const auto& q : s.sequences) {
      nlohmann::json frames = nlohmann::json::array();
      for (const auto& f : q.frames)
        frames.push_back({{"frame_id", f.frame_id},
                          {"image", f.image.generic_string()},
                          {"landmarks", f.landmarks.generic_string()},
                          {"au", f.au_coding.generic_string()}});
      sequences.push_back({{"sequence_id", q.sequence_id}, {"frames", std::move(frames)}});
    }
    subjects.push_back({{"subject_id", s.subject_id}, {"sequences", std::move(sequences)}});
  }
  write_text_file(path, nlohmann::json{{"subjects", std::move(subjects)}}.dump(2) + "\n");
}

// One fully parsed frame: landmarks, AU coding, the PSPI label, and where to
// find the pixels. Images load lazily through load_image().
struct LoadedFrame {
  std::string frame_id;
  std::string subject_id;
  std::string sequence_id;
  LandmarkFrame landmarks;
  AuCoding au;
  int pspi = 0;
  std::filesystem::path image_path;

  GrayImage load_image() const { return read_pgm(image_path); }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<LoadedFrame> frames;  // manifest order
  std::vector<std::string> subject_ids;

  const LoadedFrame& frame_by_id(const std::string& frame_id) const {
    for (const auto& f : frames)
      if (f.frame_id == frame_id) return f;
    raise(errc::missing_frames, "unknown frame id: " + frame_id);
  }
};

inline Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset d;
  d.manifest = load_manifest(manifest_path);
  std::set<std::string> seen_frames;
  std::set<std::string> subjects;
  for (const auto& s : d.manifest.subjects) {
    subjects.insert(s.subject_id);
    for (const auto& q : s.sequences) {
      for (const auto& f : q.frames) {
        if (!seen_frames.insert(f.frame_id).second)
          raise(errc::parse_error, "duplicate frame id in manifest: " + f.frame_id);
        LoadedFrame frame;
        frame.frame_id = f.frame_id;
        frame.subject_id = s.subject_id;
        frame.sequence_id = q.sequence_id;
        frame.image_path = d.manifest.root / f.image;
        if (!std::filesystem::exists(frame.image_path))
          raise(errc::io_error, "missing image file: " + frame.image_path.string());
        frame.landmarks = parse_landmark_file(d.manifest.root / f.landmarks);
        frame.landmarks.frame_id = f.frame_id;
        frame.landmarks.subject_id = s.subject_id;
        frame.landmarks.sequence_id = q.sequence_id;
        frame.au = parse_au_file(d.manifest.root / f.au_coding);
        frame.pspi = compute_pspi(frame.au).value;
        d.frames.push_back(std::move(frame));
      }
    }
  }
  d.subject_ids.assign(subjects.begin(), subjects.end());
  return d;
}

// -------- feature table persistence (binary, little-endian doubles) --------

namespace detail {

constexpr char kFeatureMagic[8] = {'P', 'R', 'F', 'E', 'A', 'T', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& context) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) raise(errc::parse_error, context + ": truncated feature file");
  return value;
}

inline void write_string(std::ofstream& out, const std::string& s) {
  write_raw(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::ifstream& in, const std::string& context) {
  const auto len = read_raw<std::uint32_t>(in, context);
  if (len > (1u << 20)) raise(errc::parse_error, context + ": unreasonable string length");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) raise(errc::parse_error, context + ": truncated feature file");
  return s;
}

}  // namespace detail

inline void persist_features(const FeatureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open for writing: " + path.string());
  out.write(detail::kFeatureMagic, sizeof detail::kFeatureMagic);
  detail::write_string(out, table.channel_id);
  detail::write_raw(out, static_cast<std::uint64_t>(table.dim));
  detail::write_raw(out, static_cast<std::uint64_t>(table.by_frame.size()));
  for (const auto& [frame_id, values] : table.by_frame) {
    if (values.size() != table.dim)
      raise(errc::dim_mismatch, "frame " + frame_id + " has inconsistent dimensionality");
    detail::write_string(out, frame_id);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) raise(errc::io_error, "write failed: " + path.string());
}

inline FeatureTable load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open: " + path.string());
  char magic[sizeof detail::kFeatureMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, detail::kFeatureMagic, sizeof magic) != 0)
    raise(errc::parse_error, path.string() + ": bad feature file header");
  FeatureTable table;
  table.channel_id = detail::read_string(in, path.string());
  table.dim = static_cast<size_t>(detail::read_raw<std::uint64_t>(in, path.string()));
  const auto count = detail::read_raw<std::uint64_t>(in, path.string());
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string frame_id = detail::read_string(in, path.string());
    std::vector<double> values(table.dim);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) raise(errc::parse_error, path.string() + ": truncated feature payload");
    table.by_frame[std::move(frame_id)] = std::move(values);
  }
  return table;
}

// Text export in the external-channel format (debugging aid).
inline void write_features_csv(const FeatureTable& table, const std::filesystem::path& path) {
  std::string out = "frame_id," + std::to_string(table.dim) + "\n";
  for (const auto& [frame_id, values] : table.by_frame) {
    out += frame_id;
    for (double v : values) {
      out += ',';
      char buf[64];
      const auto res =
          std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace painreg
