#pragma once

#include <stdexcept>
#include <string>

namespace gricp {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kIo,
  kEmptyReference,
  kNoCorrespondences,
  kDegenerateGeometry,
  kInsufficientPoints,
  kEmptyTrajectory,
  kNoAssociation,
  kOutOfScene,
};

/// Exception carried through the C++ core. The C API translates `code()`
/// into a status value and keeps `what()` as the last-error message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gricp
