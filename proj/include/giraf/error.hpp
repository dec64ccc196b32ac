#pragma once

#include <stdexcept>
#include <string>

namespace giraf {

// Base for all domain errors. `code()` is a stable machine-readable
// identifier, reused verbatim in service error bodies and CLI messages.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct NonPositiveDepthError : Error {
  explicit NonPositiveDepthError(double depth)
      : Error("NON_POSITIVE_DEPTH",
              "depth must be > 0, got " + std::to_string(depth)) {}
};

struct BehindCameraError : Error {
  explicit BehindCameraError(double z)
      : Error("BEHIND_CAMERA",
              "point has z <= 0 (z=" + std::to_string(z) +
                  "), cannot project") {}
};

struct DegenerateFingerError : Error {
  DegenerateFingerError()
      : Error("DEGENERATE_FINGER",
              "index fingertip and PIP joint coincide; no pointing direction") {
  }
};

struct ShapeMismatchError : Error {
  explicit ShapeMismatchError(const std::string& what)
      : Error("SHAPE_MISMATCH", what) {}
};

struct EmptyDatasetError : Error {
  explicit EmptyDatasetError(const std::string& what)
      : Error("EMPTY_DATASET", what) {}
};

struct EmptySequenceError : Error {
  EmptySequenceError()
      : Error("EMPTY_SEQUENCE", "recurrent forward needs at least one frame") {}
};

struct InvalidSpecError : Error {
  explicit InvalidSpecError(const std::string& what)
      : Error("INVALID_SPEC", what) {}
};

// File-level failure: the content is not parseable at all.
struct FileParseError : Error {
  explicit FileParseError(const std::string& what)
      : Error("PARSE_ERROR", what) {}
};

// The file parsed but violates a documented invariant. `path` is the
// offending field, e.g. "objects[2].label".
struct InvariantViolationError : Error {
  InvariantViolationError(const std::string& path, const std::string& what)
      : Error("INVARIANT_VIOLATION", path + ": " + what), field_path(path) {}
  std::string field_path;
};

struct NoCandidatesError : Error {
  explicit NoCandidatesError(const std::string& target)
      : Error("NO_CANDIDATES",
              "semantic filter produced no candidates for target '" + target +
                  "'") {}
};

struct EmptyCloudError : Error {
  EmptyCloudError() : Error("EMPTY_CLOUD", "scene has an empty point cloud") {}
};

// Policy-text syntax error with 1-based line/column.
struct PolicyParseError : Error {
  PolicyParseError(int line, int column, const std::string& what)
      : Error("POLICY_PARSE_ERROR", "line " + std::to_string(line) + ", col " +
                                        std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct BackendUnreachableError : Error {
  explicit BackendUnreachableError(const std::string& what)
      : Error("BACKEND_UNREACHABLE", what) {}
};

struct BackendTimeoutError : Error {
  explicit BackendTimeoutError(const std::string& what)
      : Error("BACKEND_TIMEOUT", what) {}
};

struct TranscriptMissError : Error {
  explicit TranscriptMissError(const std::string& digest)
      : Error("TRANSCRIPT_MISS",
              "no recorded completion for prompt digest " + digest) {}
};

struct IllegalTransitionError : Error {
  explicit IllegalTransitionError(const std::string& what)
      : Error("ILLEGAL_TRANSITION", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("CONFIG", what) {}
};

}  // namespace giraf
