#pragma once

#include <stdexcept>
#include <string>

namespace kinex {

enum class ErrorKind {
  parameter,        // argument outside the operation's domain
  configuration,    // inconsistent or unsupported run configuration
  precondition,     // inputs are valid individually but violate a joint requirement
  truncation,       // truncated state vector lost too much mass
  unreliable_tail,  // distribution tail beyond truncation too heavy for the metric
  numerical,        // iteration failed to converge or left its invariant set
  size,             // requested state space too large
  log_domain,       // logarithm of a nonpositive value
  undefined,        // quantity is mathematically undefined for the input
  io,               // file system or serialization failure
  validation,       // experiment config rejected before running
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace kinex
