#pragma once

#include <stdexcept>
#include <string>

namespace latk {

// Every failure the library raises maps to one of these, so callers can
// branch on intent instead of message text.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error { using Error::Error; };       // dimension mismatch
struct ParamError : Error { using Error::Error; };       // invalid numeric parameter
struct ParseError : Error { using Error::Error; };       // malformed input text
struct ValidationError : Error { using Error::Error; };  // well-formed but invalid content
struct ConfigError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };     // NaN/Inf where finite is required
struct SizeError : Error { using Error::Error; };        // instance too large for exhaustive ops
struct IoError : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };       // API misuse (stale cache, misaligned corpora)

}  // namespace latk
