#include "kinex/error.hpp"

namespace kinex {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parameter: return "parameter error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::truncation: return "truncation failure";
    case ErrorKind::unreliable_tail: return "unreliable tail";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::size: return "size error";
    case ErrorKind::log_domain: return "log-domain error";
    case ErrorKind::undefined: return "undefined";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::validation: return "validation error";
  }
  return "error";
}

}  // namespace kinex
