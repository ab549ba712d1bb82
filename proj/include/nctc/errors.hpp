#pragma once

#include <stdexcept>
#include <string>

namespace nctc {

// Error taxonomy shared by every module. All derive from std::runtime_error
// so callers that do not care about the category can catch one type.

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed embedding or model file. Message carries the line number.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad dataset content (unknown label, empty text, label out of range).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nctc
