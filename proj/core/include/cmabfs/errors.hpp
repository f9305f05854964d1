#pragma once

#include <stdexcept>
#include <string>

namespace cmabfs {

// Raised for anything wrong with user-supplied data or configuration:
// malformed CSV cells, invalid generator parameters, unknown feature names.
// The CLI maps this to exit code 2; other exceptions map to 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cmabfs
