// SPDX-License-Identifier: Apache-2.0
#include "taxsim/crossbar.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "taxsim/errors.hpp"

namespace taxsim {
namespace {

bool finite(double v) { return std::isfinite(v); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double clamp_rails(double v, double rail) {
  return std::clamp(v, 0.0, rail);
}

// Node potentials of one readout configuration. Rows or the selected column
// may be pinned when the corresponding switch resistance is exactly zero.
struct NodalSystem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v_row;
  std::vector<double> v_col;
};

// Reference solve: all row and column lines as nodes, dense LU. Handles the
// zero-resistance (pinned) cases for both modes.
NodalSystem solve_nodes(const ResistanceGrid& grid, const DriveConfig& drive,
                        std::size_t active_row, std::size_t active_col) {
  const std::size_t R = grid.rows;
  const std::size_t C = grid.cols;
  const double gs =
      drive.r_switch_on > 0.0 ? 1.0 / drive.r_switch_on : 0.0;
  const double g_leak = 1.0 / drive.r_leak;
  const bool mitigated = drive.mode == DriveMode::kMitigated;
  const double mux_r = drive.mux_resistance(active_col);

  // Pinning: a zero-resistance connection to a fixed potential removes the
  // node from the unknowns.
  const bool rows_pinned_all = mitigated && drive.r_switch_on == 0.0;
  const bool active_row_pinned = drive.r_switch_on == 0.0;  // both modes
  const bool sel_col_pinned = mitigated && mux_r == 0.0;

  auto row_pinned = [&](std::size_t i) {
    return mitigated ? rows_pinned_all : (i == active_row && active_row_pinned);
  };
  auto row_pin_value = [&](std::size_t i) {
    return i == active_row ? drive.v_in : 0.0;
  };
  auto col_pinned = [&](std::size_t j) {
    return sel_col_pinned && j == active_col;
  };

  std::vector<int> row_idx(R, -1), col_idx(C, -1);
  int n_free = 0;
  for (std::size_t i = 0; i < R; ++i)
    if (!row_pinned(i)) row_idx[i] = n_free++;
  for (std::size_t j = 0; j < C; ++j)
    if (!col_pinned(j)) col_idx[j] = n_free++;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_free, n_free);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_free);

  // Taxel branches.
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      const double g = 1.0 / grid.at(i, j);
      const int fi = row_idx[i];
      const int fj = col_idx[j];
      if (fi >= 0 && fj >= 0) {
        a(fi, fi) += g;
        a(fj, fj) += g;
        a(fi, fj) -= g;
        a(fj, fi) -= g;
      } else if (fi >= 0) {
        a(fi, fi) += g;  // column pinned at 0 V, no rhs term
      } else if (fj >= 0) {
        a(fj, fj) += g;
        b(fj) += g * row_pin_value(i);
      }
    }
  }

  // Row line terminations.
  for (std::size_t i = 0; i < R; ++i) {
    const int fi = row_idx[i];
    if (fi < 0) continue;
    if (mitigated || i == active_row) {
      a(fi, fi) += gs;
      if (i == active_row) b(fi) += gs * drive.v_in;
    } else {
      a(fi, fi) += g_leak;  // naive mode leaves inactive rows floating
    }
  }

  // Column line terminations, all to 0 V.
  for (std::size_t j = 0; j < C; ++j) {
    const int fj = col_idx[j];
    if (fj < 0) continue;
    if (mitigated) {
      a(fj, fj) += (j == active_col) ? 1.0 / mux_r : g_leak;
    } else {
      a(fj, fj) += 1.0 / drive.r_pulldown;
    }
  }

  Eigen::VectorXd x;
  if (n_free > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    x = lu.solve(b);
    if (!x.allFinite())
      throw NumericalError("nodal solve produced a non-finite solution");
  }

  NodalSystem out;
  out.rows = R;
  out.cols = C;
  out.v_row.resize(R);
  out.v_col.resize(C);
  for (std::size_t i = 0; i < R; ++i)
    out.v_row[i] = row_idx[i] >= 0 ? x(row_idx[i]) : row_pin_value(i);
  for (std::size_t j = 0; j < C; ++j)
    out.v_col[j] = col_idx[j] >= 0 ? x(col_idx[j]) : 0.0;
  return out;
}

void check_selection(const ResistanceGrid& grid, std::size_t active_row,
                     std::size_t active_col) {
  if (active_row >= grid.rows || active_col >= grid.cols)
    throw std::invalid_argument("taxel selection out of range");
}

}  // namespace

PressureField PressureField::uniform(std::size_t rows, std::size_t cols,
                                     double value) {
  PressureField f;
  f.rows = rows;
  f.cols = cols;
  f.p.assign(rows * cols, value);
  return f;
}

void PressureField::validate() const {
  require(rows >= 1 && rows <= 16, "array.rows must be in 1..16");
  require(cols >= 1 && cols <= 64, "array.cols must be in 1..64");
  require(p.size() == rows * cols, "pressure field size mismatch");
  for (double v : p)
    if (!finite(v) || v < 0.0)
      throw std::invalid_argument("pressure must be finite and >= 0");
}

void ResistanceLaw::validate() const {
  require(finite(r_max) && finite(r_min) && r_min > 0.0 && r_max > r_min,
          "law.r_max must exceed law.r_min and both must be positive");
  require(finite(k) && k > 0.0, "law.k must be > 0");
}

double resistance_from_pressure(double p_kpa, const ResistanceLaw& law) {
  if (!finite(p_kpa) || p_kpa < 0.0)
    throw std::invalid_argument("pressure must be finite and >= 0");
  return law.r_min + (law.r_max - law.r_min) / (1.0 + law.k * p_kpa);
}

void ResistanceGrid::validate() const {
  require(rows >= 1 && rows <= 16, "grid rows must be in 1..16");
  require(cols >= 1 && cols <= 64, "grid cols must be in 1..64");
  require(r.size() == rows * cols, "resistance grid size mismatch");
  for (double v : r)
    if (!finite(v) || v <= 0.0)
      throw std::invalid_argument("taxel resistance must be finite and > 0");
}

ResistanceGrid grid_from_pressure(const PressureField& field,
                                  const ResistanceLaw& law) {
  field.validate();
  law.validate();
  ResistanceGrid g;
  g.rows = field.rows;
  g.cols = field.cols;
  g.r.resize(field.p.size());
  for (std::size_t i = 0; i < field.p.size(); ++i)
    g.r[i] = resistance_from_pressure(field.p[i], law);
  return g;
}

double DriveConfig::mux_resistance(std::size_t col) const {
  double r = r_mux16 + r_mux4;
  if (col < col_mux_offset.size()) r += col_mux_offset[col];
  return r;
}

void DriveConfig::validate() const {
  require(finite(v_in) && v_in > 0.0, "drive.v_in must be > 0");
  require(finite(r_switch_on) && r_switch_on >= 0.0,
          "drive.r_switch_on must be >= 0");
  require(finite(r_mux16) && r_mux16 >= 0.0, "drive.r_mux16 must be >= 0");
  require(finite(r_mux4) && r_mux4 >= 0.0, "drive.r_mux4 must be >= 0");
  require(finite(r_f) && r_f > 0.0, "drive.r_f must be > 0");
  require(finite(r_pulldown) && r_pulldown > 0.0,
          "drive.r_pulldown must be > 0");
  require(finite(r_leak) && r_leak > 0.0, "drive.r_leak must be > 0");
  for (std::size_t j = 0; j < col_mux_offset.size(); ++j)
    require(finite(col_mux_offset[j]) && mux_resistance(j) >= 0.0,
            "drive.col_mux_offset must keep the mux resistance >= 0");
}

void AdcConfig::validate() const {
  require(bits >= 1 && bits <= 16, "adc.bits must be in 1..16");
  require(finite(v_ref) && v_ref > 0.0, "adc.v_ref must be > 0");
}

std::uint16_t quantize(double volts, const AdcConfig& adc) {
  if (!finite(volts)) throw std::invalid_argument("voltage must be finite");
  const double clamped = std::clamp(volts, 0.0, adc.v_ref);
  const double scaled = clamped / adc.v_ref * adc.full_scale();
  return static_cast<std::uint16_t>(std::floor(scaled + 0.5));
}

ReadoutSolution solve_readout_detailed(const ResistanceGrid& grid,
                                       const DriveConfig& drive,
                                       std::size_t active_row,
                                       std::size_t active_col) {
  grid.validate();
  drive.validate();
  check_selection(grid, active_row, active_col);

  const NodalSystem nodes = solve_nodes(grid, drive, active_row, active_col);

  ReadoutSolution sol;
  sol.v_row = nodes.v_row;
  sol.v_col = nodes.v_col;

  if (drive.mode == DriveMode::kMitigated) {
    const double mux_r = drive.mux_resistance(active_col);
    if (mux_r > 0.0) {
      sol.i_vg = sol.v_col[active_col] / mux_r;
    } else {
      double i = 0.0;  // current into the pinned 0 V node
      for (std::size_t r = 0; r < grid.rows; ++r)
        i += sol.v_row[r] / grid.at(r, active_col);
      sol.i_vg = i;
    }
    sol.v_raw = drive.r_f * sol.i_vg;
  } else {
    sol.i_vg = 0.0;
    sol.v_raw = sol.v_col[active_col];
  }
  sol.v_out = clamp_rails(sol.v_raw, drive.v_in);
  if (!finite(sol.v_out))
    throw NumericalError("readout produced a non-finite voltage");
  return sol;
}

double solve_readout(const ResistanceGrid& grid, const DriveConfig& drive,
                     std::size_t active_row, std::size_t active_col) {
  return solve_readout_detailed(grid, drive, active_row, active_col).v_out;
}

namespace {

// Mitigated-mode scan with nonzero switch resistance. Column lines couple
// only to row lines, so they are eliminated exactly and each column
// selection needs just one small factorization shared by all 16 rows.
void scan_mitigated_free_rows(const ResistanceGrid& grid,
                              const DriveConfig& drive, const AdcConfig& adc,
                              std::vector<std::uint16_t>& codes) {
  const std::size_t R = grid.rows;
  const std::size_t C = grid.cols;
  const double gs = 1.0 / drive.r_switch_on;
  const double g_leak = 1.0 / drive.r_leak;

  Eigen::MatrixXd g(R, C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) g(i, j) = 1.0 / grid.at(i, j);

  const Eigen::VectorXd row_sum = g.rowwise().sum();
  const Eigen::VectorXd col_sum = g.colwise().sum();

  // All-leak reduced system; per-column selection is a rank-one touch-up.
  Eigen::MatrixXd s_leak = Eigen::MatrixXd::Zero(R, R);
  for (std::size_t i = 0; i < R; ++i) s_leak(i, i) = gs + row_sum(i);
  for (std::size_t j = 0; j < C; ++j) {
    const double dc = col_sum(j) + g_leak;
    s_leak.noalias() -= (g.col(j) * g.col(j).transpose()) / dc;
  }

  Eigen::VectorXd v_rows(R);
  for (std::size_t b = 0; b < C; ++b) {
    const double mux_r = drive.mux_resistance(b);
    Eigen::MatrixXd s = s_leak;
    s.noalias() += (g.col(b) * g.col(b).transpose()) / (col_sum(b) + g_leak);
    double dc_sel = 0.0;
    double g_mux = 0.0;
    if (mux_r > 0.0) {
      g_mux = 1.0 / mux_r;
      dc_sel = col_sum(b) + g_mux;
      s.noalias() -= (g.col(b) * g.col(b).transpose()) / dc_sel;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(s);

    for (std::size_t a = 0; a < R; ++a) {
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(R);
      rhs(a) = gs * drive.v_in;
      v_rows = lu.solve(rhs);
      const double into_col = g.col(b).dot(v_rows);
      const double i_vg =
          (mux_r > 0.0) ? g_mux * (into_col / dc_sel) : into_col;
      const double v_out = clamp_rails(drive.r_f * i_vg, drive.v_in);
      if (!std::isfinite(v_out))
        throw NumericalError("scan produced a non-finite voltage");
      codes[scan_index(a, b, R)] = quantize(v_out, adc);
    }
  }
}

// Mitigated mode with ideal switches: row potentials are exact rails and
// every reading reduces to a closed form.
void scan_mitigated_pinned_rows(const ResistanceGrid& grid,
                                const DriveConfig& drive, const AdcConfig& adc,
                                std::vector<std::uint16_t>& codes) {
  const std::size_t R = grid.rows;
  const std::size_t C = grid.cols;
  for (std::size_t b = 0; b < C; ++b) {
    const double mux_r = drive.mux_resistance(b);
    double col_sum = 0.0;
    for (std::size_t i = 0; i < R; ++i) col_sum += 1.0 / grid.at(i, b);
    for (std::size_t a = 0; a < R; ++a) {
      const double g_ab = 1.0 / grid.at(a, b);
      double i_vg;
      if (mux_r > 0.0) {
        const double g_mux = 1.0 / mux_r;
        i_vg = g_mux * (g_ab * drive.v_in) / (col_sum + g_mux);
      } else {
        i_vg = g_ab * drive.v_in;
      }
      const double v_out = clamp_rails(drive.r_f * i_vg, drive.v_in);
      codes[scan_index(a, b, R)] = quantize(v_out, adc);
    }
  }
}

// Naive mode: the configuration depends only on the active row, so one
// solve per row yields all of its column readings.
void scan_naive(const ResistanceGrid& grid, const DriveConfig& drive,
                const AdcConfig& adc, std::vector<std::uint16_t>& codes) {
  const std::size_t R = grid.rows;
  const std::size_t C = grid.cols;
  for (std::size_t a = 0; a < R; ++a) {
    const NodalSystem nodes = solve_nodes(grid, drive, a, 0);
    for (std::size_t b = 0; b < C; ++b) {
      const double v_out = clamp_rails(nodes.v_col[b], drive.v_in);
      if (!std::isfinite(v_out))
        throw NumericalError("scan produced a non-finite voltage");
      codes[scan_index(a, b, R)] = quantize(v_out, adc);
    }
  }
}

}  // namespace

Frame scan_frame(const ResistanceGrid& grid, const DriveConfig& drive,
                 const AdcConfig& adc) {
  grid.validate();
  drive.validate();
  adc.validate();

  Frame frame;
  frame.codes.assign(grid.rows * grid.cols, 0);
  if (drive.mode == DriveMode::kMitigated) {
    if (drive.r_switch_on > 0.0)
      scan_mitigated_free_rows(grid, drive, adc, frame.codes);
    else
      scan_mitigated_pinned_rows(grid, drive, adc, frame.codes);
  } else {
    scan_naive(grid, drive, adc, frame.codes);
  }
  return frame;
}

}  // namespace taxsim
