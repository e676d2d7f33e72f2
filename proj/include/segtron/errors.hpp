#pragma once

#include <stdexcept>
#include <string>

namespace segtron {

// Error taxonomy mirrors the process exit codes: usage=1, data=2, numeric=3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, inadmissible configuration, violated call contracts.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (files, corpora, checkpoints).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Non-finite losses, failed gradient checks, exploding activations.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace segtron
