// SPDX-License-Identifier: Apache-2.0
#include "taxsim/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "taxsim/errors.hpp"
#include "taxsim/wire.hpp"

namespace taxsim {

const std::array<const char*, kGraspSensors> kGraspSensorLabels = {
    "L0", "L1", "L2", "R0", "R1", "R2"};

GraspSensing::GraspSensing() {
  drive.r_f = 1500.0;
  bus.n_peripherals = 3;
}

double GraspTrajectory::p_plus(double t, std::size_t joint) const {
  const double frac = ramp_time > 0.0 ? std::min(t / ramp_time, 1.0) : 1.0;
  return p_plus_peak[joint] * frac;
}

double ContactModel::contact_closure(const BoxModel& box,
                                     const ArmModel& arm) const {
  return (0.5 * arm_span - 0.5 * box.width) / arm.link_length;
}

void validate_grasp_config(const GraspConfig& cfg) {
  for (const GraspJoint& j : cfg.arm.joints) {
    if (!(j.bend_gain > 0.0)) throw ConfigError("grasp.bend_gain must be > 0");
    if (!(j.max_pressure > 0.0))
      throw ConfigError("grasp.max_pressure must be > 0");
  }
  if (!(cfg.arm.lag_tau > 0.0)) throw ConfigError("grasp.lag_tau must be > 0");
  if (!(cfg.arm.link_length > 0.0))
    throw ConfigError("grasp.link_length must be > 0");
  if (!(cfg.box.stiffness > 0.0))
    throw ConfigError("grasp.box_stiffness must be > 0");
  if (!(cfg.box.crush_threshold > 0.0))
    throw ConfigError("grasp.crush_threshold must be > 0");
  if (!(cfg.box.width > 0.0)) throw ConfigError("grasp.box_width must be > 0");
  if (!(cfg.traj.duration > 0.0))
    throw ConfigError("grasp.duration must be > 0");
  if (!(cfg.traj.ramp_time > 0.0))
    throw ConfigError("grasp.ramp_time must be > 0");
  for (double p : cfg.traj.p_plus_peak)
    if (!(p >= 0.0)) throw ConfigError("grasp.p_plus_peak must be >= 0");
  for (double p : cfg.traj.p_minus)
    if (!(p >= 0.0)) throw ConfigError("grasp.p_minus must be >= 0");
  if (!(cfg.contact.arm_span > cfg.box.width))
    throw ConfigError("grasp.arm_span must exceed grasp.box_width");
  if (!(cfg.contact.chest_closure > 0.0))
    throw ConfigError("grasp.chest_closure must be > 0");
  if (!(cfg.contact.chest_share >= 0.0))
    throw ConfigError("grasp.chest_share must be >= 0");
  if (!(cfg.contact.wrap_ratio > 0.0 && cfg.contact.wrap_ratio < 1.0))
    throw ConfigError("grasp.wrap_ratio must be in (0,1)");
  if (!(cfg.contact.wrap_sharpness > 0.0))
    throw ConfigError("grasp.wrap_sharpness must be > 0");
  if (!(cfg.contact.mid_onset_fraction > 0.0 &&
        cfg.contact.mid_onset_fraction <= 1.0))
    throw ConfigError("grasp.mid_onset_fraction must be in (0,1]");
  if (cfg.contact.patch_rows < 1 || cfg.contact.patch_rows > cfg.sensing.bus.n_in ||
      cfg.contact.patch_cols < 1 || cfg.contact.patch_cols > cfg.sensing.bus.n_out)
    throw ConfigError("grasp.patch must fit inside the sensor array");
  if (!(cfg.contact.taxel_area > 0.0))
    throw ConfigError("grasp.taxel_area must be > 0");
  if (!(cfg.k_p >= 0.0) || !std::isfinite(cfg.k_p))
    throw ConfigError("grasp.k_p must be >= 0");
  cfg.sensing.law.validate();
  cfg.sensing.drive.validate();
  cfg.sensing.adc.validate();
  cfg.sensing.bus.validate();
  cfg.sensing.hampel.validate();
  if (cfg.sensing.bus.n_peripherals != 3 || cfg.sensing.bus.n_in != 16 ||
      cfg.sensing.bus.n_out != 64)
    throw ConfigError("grasp.bus must chain 3 sensors of 16x64 taxels");
}

double modulate_pressure(double p_nominal_kpa, double sensor_sum, double k_p) {
  if (!std::isfinite(p_nominal_kpa) || !std::isfinite(sensor_sum))
    throw std::invalid_argument("pressure inputs must be finite");
  if (!(k_p >= 0.0))
    throw std::invalid_argument("k_p must be >= 0");
  return std::max(p_nominal_kpa - k_p * sensor_sum, 0.0);
}

namespace {

double wrap_gate(double rho, const ContactModel& contact) {
  return 1.0 /
         (1.0 + std::exp((rho - contact.wrap_ratio) / contact.wrap_sharpness));
}

}  // namespace

void step_plant(PlantState& state,
                const std::array<std::array<double, 2>, 2>& p_plus_cmd,
                const std::array<double, 2>& p_minus, double dt,
                const ArmModel& arm, const BoxModel& box,
                const ContactModel& contact) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("dt must be > 0");

  const double alpha = 1.0 - std::exp(-dt / arm.lag_tau);
  std::array<double, 2> closure{};
  std::array<double, 2> rho{};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double p_cmd = std::clamp(p_plus_cmd[a][j], 0.0,
                                      arm.joints[j].max_pressure);
      const double diff = std::max(p_cmd - p_minus[j], 0.0);
      const double target = arm.joints[j].bend_gain * diff;
      double& theta = state.theta[a][j];
      theta += (target - theta) * alpha;
      if (!std::isfinite(theta))
        throw NumericalError("joint state became non-finite");
    }
    closure[a] = state.theta[a][0] + state.theta[a][1];
    rho[a] = closure[a] > 0.0 ? state.theta[a][1] / closure[a] : 0.0;
  }

  const double c_touch = contact.contact_closure(box, arm);
  const double c_touch_mid = contact.mid_onset_fraction * c_touch;
  double crush = 0.0;
  for (std::size_t a = 0; a < 2; ++a) {
    // Tip-led curls (high distal share) dig into the box face; a conforming
    // wrap lays the mid link along it, which both touches earlier and takes
    // over the load.
    const double pen_distal =
        arm.link_length * std::max(closure[a] - c_touch, 0.0) * rho[a];
    const double pen_mid = arm.link_length *
                           std::max(closure[a] - c_touch_mid, 0.0) *
                           (1.0 - rho[a]) * wrap_gate(rho[a], contact);
    state.contact_force[3 * a + 1] = box.stiffness * pen_mid;
    state.contact_force[3 * a + 2] = box.stiffness * pen_distal;
    crush += pen_distal;
  }

  // Chest contact from pulling the object in.
  const double mean_closure = 0.5 * (closure[0] + closure[1]);
  const double pen_chest =
      arm.link_length *
      std::max(mean_closure - contact.chest_closure, 0.0) *
      contact.chest_share;
  const double f_chest = 0.5 * box.stiffness * pen_chest;
  state.contact_force[0] = f_chest;
  state.contact_force[3] = f_chest;

  state.deformation = crush;
  if (crush > box.crush_threshold) state.damage = true;
}

GraspReport run_grasp(const GraspConfig& cfg, bool feedback,
                      const WireTap& tap) {
  validate_grasp_config(cfg);

  const double dt = total_scan_time(cfg.sensing.bus);
  const std::size_t steps =
      static_cast<std::size_t>(std::ceil(cfg.traj.duration / dt));
  const double patch_area = cfg.contact.patch_rows * cfg.contact.patch_cols *
                            cfg.contact.taxel_area;
  const std::size_t rows = cfg.sensing.bus.n_in;
  const std::size_t cols = cfg.sensing.bus.n_out;
  const std::size_t row0 = (rows - cfg.contact.patch_rows) / 2;
  const std::size_t col0 = (cols - cfg.contact.patch_cols) / 2;

  PlantState state;
  PipelineState filter(cfg.sensing.hampel);
  std::array<StreamDecoder, 2> decoders;
  std::array<double, kGraspSensors> last_sum{};

  GraspReport report;
  report.feedback = feedback;
  report.series.reserve(steps);

  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;

    GraspTimePoint point;
    point.p_minus = cfg.traj.p_minus;
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < 2; ++j) {
        const double nominal = cfg.traj.p_plus(t, j);
        if (feedback) {
          // Joint j precedes the sensor one slot further out on the arm;
          // chest sensors (slot 0) never modulate anything.
          const std::size_t sensor = 3 * a + j + 1;
          point.p_plus_cmd[a][j] =
              modulate_pressure(nominal, last_sum[sensor], cfg.k_p);
        } else {
          point.p_plus_cmd[a][j] = nominal;
        }
      }
    }

    step_plant(state, point.p_plus_cmd, cfg.traj.p_minus, dt, cfg.arm,
               cfg.box, cfg.contact);

    double total_force = 0.0;
    for (double f : state.contact_force) total_force += f;
    report.peak_contact_force = std::max(report.peak_contact_force, total_force);
    report.peak_deformation = std::max(report.peak_deformation, state.deformation);

    // Sense through the full chain, one bus per arm.
    for (std::size_t bus_idx = 0; bus_idx < 2; ++bus_idx) {
      std::vector<ResistanceGrid> grids;
      std::array<std::uint8_t, 3> ids{};
      grids.reserve(3);
      for (std::size_t s = 0; s < 3; ++s) {
        const std::size_t sensor = 3 * bus_idx + s;
        ids[s] = static_cast<std::uint8_t>(sensor);
        PressureField field = PressureField::uniform(rows, cols, 0.0);
        const double pressure_kpa =
            state.contact_force[sensor] / patch_area / 1000.0;
        for (std::size_t r = 0; r < cfg.contact.patch_rows; ++r)
          for (std::size_t c = 0; c < cfg.contact.patch_cols; ++c)
            field.at(row0 + r, col0 + c) = pressure_kpa;
        grids.push_back(grid_from_pressure(field, cfg.sensing.law));
      }

      const std::vector<ScanBatch> batches =
          acquire_frames(grids, cfg.sensing.drive, cfg.sensing.adc,
                         cfg.sensing.bus, 1, ids);
      const std::vector<std::uint8_t> bytes =
          encode_message(batches[0].frames);
      if (tap) tap(static_cast<int>(bus_idx), bytes);

      const std::vector<Message> msgs = decoders[bus_idx].push(bytes);
      if (msgs.size() != 1)
        throw NumericalError("sensing chain lost a message");
      const Message& msg = msgs[0];
      for (std::size_t s = 0; s < msg.n_sensors(); ++s) {
        Frame raw;
        raw.sensor_id = msg.sensor_ids[s];
        raw.t_acquired = t + dt;
        const auto codes = msg.sensor_codes(s);
        raw.codes.assign(codes.begin(), codes.end());
        const Frame filtered = filter.filter_frame(raw);

        double sum = 0.0;
        for (std::uint16_t c : filtered.codes) sum += c;
        last_sum[raw.sensor_id] = sum;
        point.activation[raw.sensor_id] =
            normalized_total_activation(filtered);
      }
    }

    point.t = t + dt;
    point.deformation = state.deformation;
    point.damage = state.damage;
    report.series.push_back(point);
  }

  for (std::size_t s = 0; s < kGraspSensors; ++s) {
    double sum = 0.0;
    for (const GraspTimePoint& p : report.series) sum += p.activation[s];
    report.mean_activation[s] =
        report.series.empty() ? 0.0 : sum / static_cast<double>(report.series.size());
  }
  report.damage = state.damage;
  return report;
}

}  // namespace taxsim
