#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace secg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration (bad family, delta <= 0, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector lengths that do not agree with the dictionary.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The constructed atom set does not span R^{n_b}.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// An atom lies (numerically) in the span of the already selected atoms.
class DegenerateAtomError : public Error {
 public:
  using Error::Error;
};

/// A metric whose denominator vanishes (zero-energy record, K = 0, ...).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Malformed input record.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Malformed container, stream or model. `position` is the byte (or symbol)
/// position in the stream being decoded.
class CorruptError : public Error {
 public:
  CorruptError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace secg
