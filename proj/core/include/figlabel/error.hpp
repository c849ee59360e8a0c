#pragma once

#include <stdexcept>
#include <string>

namespace figlabel {

// Library-wide exception. The message starts with a stable machine-checkable
// reason ("page mismatch", "caption not found", ...) optionally followed by
// ": <detail>".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace figlabel
