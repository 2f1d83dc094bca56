#include "agdl/error.hpp"

namespace agdl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::UnsupportedVersion: return "unsupported version";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Argument: return "argument error";
    case ErrorKind::InconclusiveProbe: return "inconclusive probe";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::InsufficientSignal: return "insufficient signal";
    case ErrorKind::NoJumpFound: return "no jump found";
    case ErrorKind::TooLarge: return "too large for exhaustive search";
    case ErrorKind::IncompatibleTraces: return "incompatible traces";
    case ErrorKind::NotFound: return "not found";
  }
  return "error";
}

Error Error::with_stage(std::string_view stage) const {
  return Error(kind_, "[" + std::string(stage) + "] " + what());
}

}  // namespace agdl
