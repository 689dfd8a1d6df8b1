#pragma once

#include <stdexcept>

namespace epitext {

/// Base class for all errors surfaced by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An input file could not be parsed; the message carries file and line context.
struct ParseError : Error {
  using Error::Error;
};

/// A chat endpoint was unreachable or returned an unusable response after retries.
struct TransportError : Error {
  using Error::Error;
};

}  // namespace epitext
