#include "drowsy/error.hpp"

#include <utility>

namespace drowsy {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::LabelLengthMismatch: return "LabelLengthMismatch";
    case ErrorKind::GridTooFine: return "GridTooFine";
    case ErrorKind::InsufficientSubjects: return "InsufficientSubjects";
    case ErrorKind::NoNormalClips: return "NoNormalClips";
    case ErrorKind::SingleClassInput: return "SingleClassInput";
    case ErrorKind::DivergenceDetected: return "DivergenceDetected";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& stage,
                           const std::string& message) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(kind);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message)
    : Error(kind, std::string{}, message) {}

Error::Error(ErrorKind kind, std::string stage, const std::string& message)
    : std::runtime_error(format_message(kind, stage, message)),
      kind_(kind),
      stage_(std::move(stage)),
      detail_(message) {}

Error Error::with_stage(std::string stage) const {
  if (!stage_.empty()) return *this;
  return Error(kind_, std::move(stage), detail_);
}

}  // namespace drowsy
