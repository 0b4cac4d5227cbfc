#pragma once

#include <stdexcept>
#include <string>

namespace glyph {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input that violates an operation's precondition.
struct InvalidInput : Error {
  using Error::Error;
};

struct NotFound : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct GenerationError : Error {
  using Error::Error;
};

}  // namespace glyph
