#ifndef TONGUEAGE_ERRORS_HPP
#define TONGUEAGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tongueage {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes are inconsistent with the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of its valid domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file or byte stream does not follow its declared layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Raw ultrasound geometry other than 63 scanlines x 412 echo returns.
class UnsupportedGeometryError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Malformed text (age labels, key=value lines, CSV cells).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A named entity (layer, key) does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tongueage

#endif  // TONGUEAGE_ERRORS_HPP
