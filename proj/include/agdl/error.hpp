#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agdl {

enum class ErrorKind {
  Parse,
  UnsupportedVersion,
  Integrity,
  Io,
  Config,
  Argument,
  InconclusiveProbe,
  InsufficientData,
  InsufficientSignal,
  NoJumpFound,
  TooLarge,
  IncompatibleTraces,
  NotFound,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so that callers (the CLI
// in particular) can map it to an exit code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Same kind, message prefixed with the pipeline stage that raised it.
  Error with_stage(std::string_view stage) const;

 private:
  ErrorKind kind_;
};

}  // namespace agdl
