#pragma once

#include <doctest.h>

#include "kinex/error.hpp"

// Runs f and returns the kind of the kinex::Error it throws.
template <typename F>
kinex::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const kinex::Error& e) {
    return e.kind();
  }
  FAIL("expected a kinex::Error");
  return kinex::ErrorKind::io;
}
