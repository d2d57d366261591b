// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace taxsim {

// Solver produced a singular or non-finite result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data violates the wire format contract.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Configuration violates a documented invariant; message names the key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace taxsim
