#pragma once

#include <stdexcept>
#include <string>

namespace darmois {

// Malformed input: bad shapes, incompatible groups, unreadable files. CLI exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-posed input whose mathematical check fails. CLI exit code 2.
struct MathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace darmois
