#pragma once

#include <stdexcept>
#include <string>

namespace emopred {

// Bad or inconsistent input data (files, formats, label sets). CLI exit 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid flag combination or argument. CLI exit 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace emopred
