// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "taxsim/frame.hpp"

namespace taxsim {

// Applied pressure per taxel (kPa), row-major [rows x cols]. Rows are driven
// input lines, columns are sensed output lines.
struct PressureField {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> p;

  static PressureField uniform(std::size_t rows, std::size_t cols,
                               double value = 0.0);

  double at(std::size_t r, std::size_t c) const { return p[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return p[r * cols + c]; }
  void validate() const;
};

// Saturating inverse-linear pressure-to-resistance law:
//   R(p) = r_min + (r_max - r_min) / (1 + k * p)
// Monotone decreasing from r_max at rest toward r_min under load. Parameters
// are config-exposed so calibration data could be substituted later.
struct ResistanceLaw {
  double r_max = 1e6;    // ohms, unloaded taxel
  double r_min = 100.0;  // ohms, fully loaded floor
  double k = 0.1;        // sensitivity, 1/kPa

  void validate() const;
};

double resistance_from_pressure(double p_kpa, const ResistanceLaw& law);

// Per-taxel resistances (ohms), row-major. Open taxels carry r_max, never
// infinity, so the nodal system stays finite.
struct ResistanceGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> r;

  double at(std::size_t row, std::size_t col) const {
    return r[row * cols + col];
  }
  double& at(std::size_t row, std::size_t col) { return r[row * cols + col]; }
  void validate() const;
};

ResistanceGrid grid_from_pressure(const PressureField& field,
                                  const ResistanceLaw& law);

enum class DriveMode { kMitigated, kNaive };

// Readout electronics model. Mitigated mode drives the active row, grounds
// every inactive row through its changeover switch, and holds the active
// column at an ideal virtual ground whose input current is converted to a
// voltage by r_f. Naive mode leaves inactive rows floating and reads the
// active column across a pull-down resistor, which is the classic un-guarded
// scan and exhibits sneak-path ghosting.
struct DriveConfig {
  double v_in = 3.3;          // volts, drive rail
  double r_switch_on = 0.35;  // ohms, row SPDT switch (either throw)
  double r_mux16 = 2.5;       // ohms, 16:1 mux stage
  double r_mux4 = 0.5;        // ohms, 4:1 mux stage
  double r_f = 1000.0;        // ohms, transimpedance feedback (sensitivity)
  DriveMode mode = DriveMode::kMitigated;
  double r_pulldown = 10e3;   // ohms, naive-mode column readout
  double r_leak = 1e9;        // ohms, numerical grounding of open nodes
  // Optional per-column mux on-resistance spread; empty means flat.
  std::vector<double> col_mux_offset;

  double mux_resistance(std::size_t col) const;
  void validate() const;
};

struct AdcConfig {
  unsigned bits = 12;
  double v_ref = 3.3;

  std::uint16_t full_scale() const {
    return static_cast<std::uint16_t>((1u << bits) - 1u);
  }
  void validate() const;
};

// round(clamp(v, 0, v_ref) / v_ref * full_scale), round half up.
std::uint16_t quantize(double volts, const AdcConfig& adc);

// Full nodal solution for one taxel selection. v_raw is the transimpedance
// output before rail clamping (or the pull-down voltage in naive mode),
// v_out the railed value, i_vg the current into the virtual ground
// (mitigated mode only, else 0).
struct ReadoutSolution {
  std::vector<double> v_row;
  std::vector<double> v_col;
  double i_vg = 0.0;
  double v_raw = 0.0;
  double v_out = 0.0;
};

// Reference path: assembles the full nodal conductance system over every
// row and column line and solves it directly. Zero switch/mux resistances
// are handled by pinning the corresponding nodes to their rail.
ReadoutSolution solve_readout_detailed(const ResistanceGrid& grid,
                                       const DriveConfig& drive,
                                       std::size_t active_row,
                                       std::size_t active_col);

// Measured voltage for one taxel (rail-clamped).
double solve_readout(const ResistanceGrid& grid, const DriveConfig& drive,
                     std::size_t active_row, std::size_t active_col);

// One ADC code per taxel in scan order. Bit-equivalent to quantizing
// solve_readout per taxel but shares factorizations across selections.
Frame scan_frame(const ResistanceGrid& grid, const DriveConfig& drive,
                 const AdcConfig& adc);

}  // namespace taxsim
