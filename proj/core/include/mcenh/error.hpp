// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace mcenh {

// All recoverable failures in the library are reported with this type (or a
// subclass carrying extra context).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mcenh
