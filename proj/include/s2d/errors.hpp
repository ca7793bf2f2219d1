#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2d {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or malformed inputs. The CLI maps these to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Parse failure in a text or image file; carries the offending line when known.
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InvalidInput(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// A point with non-positive depth was handed to the projection.
class BehindCamera : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A computation could not produce a meaningful result. CLI exit code 3.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Sparse-to-dense was asked to densify an image without a single valid seed.
class NoSeeds : public NumericalFailure {
 public:
  explicit NoSeeds(const std::string& what = "sparse depth image contains no valid seed") : NumericalFailure(what) {}
};

/// Scale correction had no usable point (empty set or zero total baseline).
class NoCorrectionEvidence : public NumericalFailure {
 public:
  explicit NoCorrectionEvidence(const std::string& what = "no scale-correction evidence")
      : NumericalFailure(what) {}
};

}  // namespace s2d
