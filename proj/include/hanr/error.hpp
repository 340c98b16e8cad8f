#pragma once

#include <stdexcept>
#include <string>

namespace hanr {

// Process exit codes used by the command line tool.
enum class ExitCode : int { kOk = 0, kConfig = 2, kData = 3, kNumeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Inconsistent configuration: sample rates, band counts, dimensions, ranges.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ExitCode::kConfig, what) {}
};

// Malformed or unusable input data: bad files, NaN samples, ordering.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ExitCode::kData, what) {}
};

// Non-finite values during optimisation.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ExitCode::kNumeric, what) {}
};

}  // namespace hanr
