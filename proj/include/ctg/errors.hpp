#pragma once

#include <stdexcept>
#include <string>

namespace ctg {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FileNotFoundError : Error {
  explicit FileNotFoundError(const std::string& path) : Error("file not found: " + path) {}
};

struct MalformedRowError : Error {
  MalformedRowError(std::size_t line, const std::string& what)
      : Error("malformed row at line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct LengthMismatchError : Error {
  explicit LengthMismatchError(const std::string& what) : Error("column length mismatch: " + what) {}
};

struct EmptyRecordError : Error {
  explicit EmptyRecordError(const std::string& what) : Error("empty record: " + what) {}
};

struct TooShortError : Error {
  explicit TooShortError(double duration_s)
      : Error("record too short for analysis: " + std::to_string(duration_s) + " s"),
        duration_s(duration_s) {}
  double duration_s;
};

struct AllGapsError : Error {
  AllGapsError() : Error("signal contains no valid samples") {}
};

struct BaselineIndeterminableError : Error {
  BaselineIndeterminableError() : Error("baseline indeterminable; excursion detection requires a baseline") {}
};

struct OverlapError : Error {
  explicit OverlapError(const std::string& what) : Error("scenario episodes overlap: " + what) {}
};

struct OutOfRangeError : Error {
  explicit OutOfRangeError(const std::string& what) : Error("value out of range: " + what) {}
};

struct WrongFeatureSetError : Error {
  explicit WrongFeatureSetError(const std::string& what) : Error("wrong feature set: " + what) {}
};

struct MissingLabelError : Error {
  explicit MissingLabelError(const std::string& record_id)
      : Error("no label for record: " + record_id) {}
};

struct UnknownFeatureError : Error {
  explicit UnknownFeatureError(const std::string& name) : Error("unknown feature: " + name) {}
};

/// Raised when a backend reply carries no single classification token.
/// The raw reply text is preserved for diagnostics.
struct ReplyParseError : Error {
  explicit ReplyParseError(std::string raw_reply)
      : Error("could not parse classification from reply"), raw(std::move(raw_reply)) {}
  std::string raw;
};

struct BackendUnavailableError : Error {
  explicit BackendUnavailableError(const std::string& what) : Error("backend unavailable: " + what) {}
};

struct TimeoutError : Error {
  explicit TimeoutError(const std::string& what) : Error("timed out: " + what) {}
};

/// Wraps a failure inside one feature agent so the pipeline can report
/// which agent failed without partial aggregation.
struct AgentError : Error {
  AgentError(const std::string& agent, const std::string& what)
      : Error("agent '" + agent + "' failed: " + what), agent(agent) {}
  std::string agent;
};

}  // namespace ctg
