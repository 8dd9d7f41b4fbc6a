#pragma once

#include <stdexcept>
#include <string>

namespace detex {

/// A model or configuration violates a documented assumption.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation was refused because it exceeds a resource guard.
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace detex
