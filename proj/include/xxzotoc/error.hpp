#pragma once

#include <stdexcept>
#include <string>

namespace xxz {

enum class ErrorKind {
  domain,     // invalid argument or precondition
  capacity,   // chain too large for dense storage
  numeric,    // eigensolver or fit breakdown
  resource,   // configured work budget exceeded
  not_found,  // e.g. no threshold crossing
  fit,        // degenerate fit data
  io,
  usage,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace xxz
