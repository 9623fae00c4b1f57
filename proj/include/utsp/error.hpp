#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace utsp {

enum class ErrorKind {
  snap,          // point does not sit on a grid cell center
  duplicate,     // two points occupy the same grid cell
  format,        // malformed input file
  size,          // input too large for an exact routine
  witness,       // supplied path/witness does not match its set
  parameter,     // invalid numeric parameter
  constraint,    // strict-mode parameter inequality violated
  resolution,    // grid too coarse for the requested rectangles
  enumeration,   // enumeration budget exceeded
  precondition,  // operation called on an object in the wrong state
  construction,  // an internal certificate failed to verify
  coverage,      // CASE A requested but some square has no backtrack
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace utsp
