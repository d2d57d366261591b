// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace taxsim {

// One full scan of a sensor: ADC codes in scan order plus the simulated
// acquisition time.
struct Frame {
  std::uint8_t sensor_id = 0;
  std::vector<std::uint16_t> codes;
  double t_acquired = 0.0;  // seconds, simulated
};

// Canonical scan order. The output (column) counter advances once per full
// input cycle, so the input (row) index varies fastest:
//   index = col * n_rows + row
inline std::size_t scan_index(std::size_t row, std::size_t col,
                              std::size_t n_rows) {
  return col * n_rows + row;
}

}  // namespace taxsim
