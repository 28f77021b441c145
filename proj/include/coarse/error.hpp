#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coarse {

enum class ErrorCode {
  EmptySet,
  NotACover,
  SizeLimit,
  ScaleMismatch,
  SeedInvalid,
  WindowExhausted,
  ChainViolation,
  NoCoveringSet,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace coarse
