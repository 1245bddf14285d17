#pragma once

#include <stdexcept>
#include <string>

namespace hdmann {

// Degenerate numeric input (zero-norm vector, out-of-domain argument, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or malformed structured input (schema, shapes, labels).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem / format failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hdmann
