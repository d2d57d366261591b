// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "taxsim/crossbar.hpp"
#include "taxsim/pipeline.hpp"
#include "taxsim/scan_bus.hpp"

namespace taxsim {

// Planar two-arm grasp of a deformable box. Each arm has two pneumatic
// joints whose bend tracks the antagonistic pressure differential with a
// first-order lag; contact forces are mapped onto the arm-mounted sensor
// patches and fed back through the full sensing chain.

inline constexpr std::size_t kGraspSensors = 6;
// 0..2 left chain (chest, mid, distal), 3..5 right chain.
extern const std::array<const char*, kGraspSensors> kGraspSensorLabels;

struct GraspJoint {
  double bend_gain = 0.004;    // rad per kPa of differential
  double max_pressure = 400.0; // kPa command clamp
};

struct ArmModel {
  std::array<GraspJoint, 2> joints;  // [0] proximal, [1] distal
  double lag_tau = 0.2;              // s, pressure-to-angle lag
  double link_length = 0.5;          // m, effective contact radius
};

struct BoxModel {
  double stiffness = 2000.0;     // N/m
  double crush_threshold = 0.05; // m of total deformation = damage
  double width = 0.4;            // m
};

// Nominal commanded pressures: linear ramp to the peak, then hold.
struct GraspTrajectory {
  double duration = 4.0;   // s
  double ramp_time = 2.2;  // s
  std::array<double, 2> p_plus_peak = {180.0, 280.0};  // kPa per joint
  std::array<double, 2> p_minus = {30.0, 30.0};        // kPa per joint

  double p_plus(double t, std::size_t joint) const;
};

// Planar contact geometry. Tip-led curls concentrate load on the distal
// link; relaxing the distal joint lets the arm conform, so the mid link
// meets the box face earlier and carries surface contact. The wrap gate
// models that handoff as a smooth function of the distal joint share.
struct ContactModel {
  double arm_span = 1.4;          // m between the arms' rest poses
  double chest_closure = 1.3;     // rad of mean closure before chest contact
  double chest_share = 0.25;      // fraction of over-closure pulled into chest
  double wrap_ratio = 0.45;        // distal joint share where handoff happens
  double wrap_sharpness = 0.02;    // softness of the handoff
  double mid_onset_fraction = 0.65;  // mid-link contact onset vs tip onset
  unsigned patch_rows = 8;        // contact patch size in taxels
  unsigned patch_cols = 8;
  double taxel_area = 1e-4;       // m^2

  // Closure angle at which the arm tips reach the box faces.
  double contact_closure(const BoxModel& box, const ArmModel& arm) const;
};

struct GraspSensing {
  GraspSensing();  // grasp-tuned defaults (higher r_max law, 3-sensor bus)

  // Unloaded taxels must quantize to zero so the feedback sum carries no
  // common-mode bias: r_f * v_in / r_max stays below half a code.
  ResistanceLaw law{2e7, 100.0, 5.0};
  DriveConfig drive;
  AdcConfig adc;
  BusConfig bus;
  HampelConfig hampel;
};

struct GraspConfig {
  ArmModel arm;
  BoxModel box;
  GraspTrajectory traj;
  ContactModel contact;
  GraspSensing sensing;
  double k_p = 0.35;  // kPa per ADC count of whole-sensor sum
};

void validate_grasp_config(const GraspConfig& cfg);

// max(p_nominal - k_p * sensor_sum, 0)
double modulate_pressure(double p_nominal_kpa, double sensor_sum, double k_p);

struct PlantState {
  std::array<std::array<double, 2>, 2> theta{};  // [arm][joint], rad
  double deformation = 0.0;                      // m, current box crush
  bool damage = false;                           // latched
  std::array<double, kGraspSensors> contact_force{};  // N per sensor patch
};

// Quasi-static plant step: first-order joint tracking, contact forces from
// closure, box deformation and damage latch.
void step_plant(PlantState& state,
                const std::array<std::array<double, 2>, 2>& p_plus_cmd,
                const std::array<double, 2>& p_minus, double dt,
                const ArmModel& arm, const BoxModel& box,
                const ContactModel& contact);

struct GraspTimePoint {
  double t = 0.0;
  std::array<std::array<double, 2>, 2> p_plus_cmd{};  // [arm][joint]
  std::array<double, 2> p_minus{};
  double deformation = 0.0;
  bool damage = false;
  std::array<double, kGraspSensors> activation{};  // filtered, per frame
};

struct GraspReport {
  bool feedback = false;
  std::vector<GraspTimePoint> series;
  std::array<double, kGraspSensors> mean_activation{};
  double peak_deformation = 0.0;
  double peak_contact_force = 0.0;  // max over time of summed patch forces
  bool damage = false;
};

// Observes every encoded bus message; bus_index is 0 (left) or 1 (right).
using WireTap =
    std::function<void(int bus_index, std::span<const std::uint8_t> bytes)>;

// Executes the trajectory at the sensing frame rate. Each step runs the
// genuine chain circuit -> scan -> encode -> decode -> filter; with feedback
// on, each joint's drive pressure is modulated by the whole-sensor sum of
// the sensor it precedes. Chest sensors are sensed but never modulate.
GraspReport run_grasp(const GraspConfig& cfg, bool feedback,
                      const WireTap& tap = {});

}  // namespace taxsim
