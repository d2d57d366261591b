// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent closed-form solution of the 2x2 readout network, for checking
// the general solver. The four nodal equations below were laid out by hand
// from the circuit (active row 0, selected column 0) and are solved with
// explicit Cramer determinants; nothing here shares code with the library
// solver.

#include <algorithm>
#include <array>
#include <cmath>

namespace oracle {

struct TwoByTwo {
  double r00, r01, r10, r11;
};

struct Params {
  double v_in = 3.3;
  double r_switch_on = 0.35;
  double r_mux = 3.0;  // mux16 + mux4
  double r_f = 1000.0;
  double r_leak = 1e9;
  double r_pulldown = 10e3;
};

struct Solution {
  double vr0, vr1, vc0, vc1;
  double i_vg;    // mitigated only
  double v_raw;   // before rail clamp
  double v_out;
};

inline double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

inline double det4(const std::array<std::array<double, 4>, 4>& m) {
  double sum = 0.0;
  for (int c = 0; c < 4; ++c) {
    std::array<double, 9> minor{};
    int idx = 0;
    for (int i = 1; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (j != c) minor[idx++] = m[i][j];
    const double term = m[0][c] * det3(minor);
    sum += (c % 2 == 0) ? term : -term;
  }
  return sum;
}

inline std::array<double, 4> cramer4(std::array<std::array<double, 4>, 4> a,
                                     const std::array<double, 4>& b) {
  const double d = det4(a);
  std::array<double, 4> x{};
  for (int c = 0; c < 4; ++c) {
    auto ac = a;
    for (int r = 0; r < 4; ++r) ac[r][c] = b[r];
    x[c] = det4(ac) / d;
  }
  return x;
}

// Mitigated drive, reading taxel (0,0):
//   row 0 to v_in through the switch, row 1 to ground through the switch,
//   column 0 to the 0 V virtual ground through the mux, column 1 open
//   except for the leak. V_out = r_f * current into the virtual ground.
inline Solution mitigated_2x2(const TwoByTwo& r, const Params& p) {
  const double g00 = 1.0 / r.r00, g01 = 1.0 / r.r01;
  const double g10 = 1.0 / r.r10, g11 = 1.0 / r.r11;
  const double gs = 1.0 / p.r_switch_on;
  const double gm = 1.0 / p.r_mux;
  const double gl = 1.0 / p.r_leak;

  const std::array<std::array<double, 4>, 4> a = {{
      {gs + g00 + g01, 0.0, -g00, -g01},
      {0.0, gs + g10 + g11, -g10, -g11},
      {-g00, -g10, g00 + g10 + gm, 0.0},
      {-g01, -g11, 0.0, g01 + g11 + gl},
  }};
  const std::array<double, 4> b = {gs * p.v_in, 0.0, 0.0, 0.0};
  const auto x = cramer4(a, b);

  Solution s{x[0], x[1], x[2], x[3], 0.0, 0.0, 0.0};
  s.i_vg = gm * s.vc0;
  s.v_raw = p.r_f * s.i_vg;
  s.v_out = std::clamp(s.v_raw, 0.0, p.v_in);
  return s;
}

// Naive drive, reading taxel (0,0): row 0 driven, row 1 floating through the
// leak, both columns pulled down. V_out is the selected column voltage.
inline Solution naive_2x2(const TwoByTwo& r, const Params& p) {
  const double g00 = 1.0 / r.r00, g01 = 1.0 / r.r01;
  const double g10 = 1.0 / r.r10, g11 = 1.0 / r.r11;
  const double gs = 1.0 / p.r_switch_on;
  const double gl = 1.0 / p.r_leak;
  const double gpd = 1.0 / p.r_pulldown;

  const std::array<std::array<double, 4>, 4> a = {{
      {gs + g00 + g01, 0.0, -g00, -g01},
      {0.0, gl + g10 + g11, -g10, -g11},
      {-g00, -g10, g00 + g10 + gpd, 0.0},
      {-g01, -g11, 0.0, g01 + g11 + gpd},
  }};
  const std::array<double, 4> b = {gs * p.v_in, 0.0, 0.0, 0.0};
  const auto x = cramer4(a, b);

  Solution s{x[0], x[1], x[2], x[3], 0.0, 0.0, 0.0};
  s.v_raw = s.vc0;
  s.v_out = std::clamp(s.v_raw, 0.0, p.v_in);
  return s;
}

}  // namespace oracle
