#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cenal {

/// Bad user-supplied configuration (sizes, ranges, unknown names).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Shape mismatch between weights, masks and inputs.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Optimisation produced a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::ptrdiff_t sample_index = -1)
      : std::runtime_error(what), sample_index_(sample_index) {}
  /// Index of the offending sample, or -1 when not attributable.
  std::ptrdiff_t sample_index() const { return sample_index_; }

 private:
  std::ptrdiff_t sample_index_;
};

/// CSV parse failure with 1-based row attribution.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cenal
