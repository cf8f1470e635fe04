#pragma once

#include <stdexcept>
#include <string>

namespace painreg {

// Failure categories surfaced by the library. The CLI maps io_error to
// exit code 2 and everything else to 1.
enum class errc {
  missing_au,
  out_of_range,
  empty_dataset,
  degenerate_anchors,
  out_of_bounds,
  degenerate_angle,
  bad_patch,
  degenerate_region,
  empty_sequence,
  dim_mismatch,
  missing_frames,
  bad_input,
  numerical_failure,
  insufficient_subjects,
  bad_method,
  bad_window,
  parse_error,
  io_error,
  bad_config,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::missing_au: return "missing_au";
    case errc::out_of_range: return "out_of_range";
    case errc::empty_dataset: return "empty_dataset";
    case errc::degenerate_anchors: return "degenerate_anchors";
    case errc::out_of_bounds: return "out_of_bounds";
    case errc::degenerate_angle: return "degenerate_angle";
    case errc::bad_patch: return "bad_patch";
    case errc::degenerate_region: return "degenerate_region";
    case errc::empty_sequence: return "empty_sequence";
    case errc::dim_mismatch: return "dim_mismatch";
    case errc::missing_frames: return "missing_frames";
    case errc::bad_input: return "bad_input";
    case errc::numerical_failure: return "numerical_failure";
    case errc::insufficient_subjects: return "insufficient_subjects";
    case errc::bad_method: return "bad_method";
    case errc::bad_window: return "bad_window";
    case errc::parse_error: return "parse_error";
    case errc::io_error: return "io_error";
    case errc::bad_config: return "bad_config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, errc code, const std::string& message) {
  if (!condition) raise(code, message);
}

}  // namespace painreg
