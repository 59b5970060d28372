#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace matsplat {

enum class ErrorKind {
  Io,                // file missing or unreadable
  Format,            // malformed or unsupported file layout
  UnsupportedModel,  // camera model other than pinhole
  Schema,            // structurally invalid configuration document
  Data,              // values violate a type invariant
  Reference,         // dangling identifier between files
  Shape,             // dimension mismatch between inputs
  Range,             // scalar outside its declared range
  UnmappedClass,     // class id with no material record
  Domain,            // argument outside a function's domain
  Input,             // semantically unusable input (empty mesh, short trajectory, ...)
  Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace matsplat
