#pragma once

#include <stdexcept>
#include <string>

namespace satire {

// Bad invocation: missing flags, absent files, incompatible options.
// The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent data: corpus lines, lexicon files, checkpoints,
// shape mismatches. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace satire
