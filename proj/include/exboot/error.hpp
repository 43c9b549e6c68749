#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exboot {

enum class ErrorCode {
  InvalidArgument,
  Io,
  MissingCell,
  DuplicateIndex,
  RaggedRow,
  NonNumeric,
  SelfLoop,
  TooFewUnits,
  DegenerateScale,
  DegenerateData,
  ZeroMassOnly,
  ModeMismatch,
  SupportTooLarge,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code. Every failure raised by the
/// library goes through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& what,
                    ErrorCode code = ErrorCode::InvalidArgument) {
  if (!condition) throw Error(code, what);
}

}  // namespace exboot
