#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drowsy {

enum class ErrorKind {
  ZeroVector,
  DimensionMismatch,
  ShapeMismatch,
  ParseError,
  LabelLengthMismatch,
  GridTooFine,
  InsufficientSubjects,
  NoNormalClips,
  SingleClassInput,
  DivergenceDetected,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can dispatch without parsing messages. An optional stage
/// tag records which pipeline stage produced the error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, std::string stage, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Same error re-tagged with a pipeline stage (keeps an existing tag).
  Error with_stage(std::string stage) const;

 private:
  ErrorKind kind_;
  std::string stage_;
  std::string detail_;
};

}  // namespace drowsy
