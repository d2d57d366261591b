// SPDX-License-Identifier: Apache-2.0
#include "taxsim/config.hpp"

#include <fstream>
#include <set>

#include "taxsim/errors.hpp"

namespace taxsim {
namespace {

using nlohmann::json;

// Strict view of one JSON object: every key must be consumed exactly once.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  const json* find(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    seen_.insert(key);
    return &*it;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ConfigError("unknown key: " + path_ + "." + it.key());
  }

  std::string key_path(const char* key) const { return path_ + "." + key; }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void get(const char* key, unsigned& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned())
        throw ConfigError(key_path(key) + " must be a non-negative integer");
      out = v->get<unsigned>();
    }
  }

  void get(const char* key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned())
        throw ConfigError(key_path(key) + " must be a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void get(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key) + " must be an array");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number())
          throw ConfigError(key_path(key) + " must hold numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  void get(const char* key, std::array<double, 2>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
          !(*v)[1].is_number())
        throw ConfigError(key_path(key) + " must be an array of 2 numbers");
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void get(const char* key, TaxelCoord& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_unsigned() ||
          !(*v)[1].is_number_unsigned())
        throw ConfigError(key_path(key) + " must be a [row, col] pair");
      out = {(*v)[0].get<std::size_t>(), (*v)[1].get<std::size_t>()};
    }
  }

  void get(const char* key, std::vector<TaxelCoord>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(key_path(key) + " must be an array");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
            !e[1].is_number_unsigned())
          throw ConfigError(key_path(key) + " must hold [row, col] pairs");
        out.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_law(const json& j, const std::string& path, ResistanceLaw& law) {
  Obj o(j, path);
  o.get("r_max", law.r_max);
  o.get("r_min", law.r_min);
  o.get("k", law.k);
  o.done();
}

void parse_drive(const json& j, const std::string& path, DriveConfig& drive) {
  Obj o(j, path);
  o.get("v_in", drive.v_in);
  o.get("r_switch_on", drive.r_switch_on);
  o.get("r_mux16", drive.r_mux16);
  o.get("r_mux4", drive.r_mux4);
  o.get("r_f", drive.r_f);
  o.get("r_pulldown", drive.r_pulldown);
  o.get("r_leak", drive.r_leak);
  o.get("col_mux_offset", drive.col_mux_offset);
  std::string mode;
  o.get("mode", mode);
  if (!mode.empty()) {
    if (mode == "mitigated")
      drive.mode = DriveMode::kMitigated;
    else if (mode == "naive")
      drive.mode = DriveMode::kNaive;
    else
      throw ConfigError(path + ".mode must be 'mitigated' or 'naive'");
  }
  o.done();
}

void parse_adc(const json& j, const std::string& path, AdcConfig& adc) {
  Obj o(j, path);
  o.get("bits", adc.bits);
  o.get("v_ref", adc.v_ref);
  o.done();
}

void parse_bus(const json& j, const std::string& path, BusConfig& bus) {
  Obj o(j, path);
  o.get("n_peripherals", bus.n_peripherals);
  o.get("spi_clock_hz", bus.spi_clock_hz);
  o.get("bits_per_transfer", bus.bits_per_transfer);
  o.get("t_proc", bus.t_proc);
  o.get("t_delay", bus.t_delay);
  o.get("n_in", bus.n_in);
  o.get("n_out", bus.n_out);
  o.get("integrity_limit_hz", bus.integrity_limit_hz);
  o.get("per_frame_overhead", bus.per_frame_overhead);
  o.done();
}

void parse_hampel(const json& j, const std::string& path, HampelConfig& h) {
  Obj o(j, path);
  o.get("window", h.window);
  o.get("k", h.k);
  o.get("mad_scale", h.mad_scale);
  o.get("mad_floor", h.mad_floor);
  o.done();
}

void parse_grasp(const json& j, GraspConfig& g) {
  Obj o(j, "grasp");
  std::array<double, 2> bend_gain = {g.arm.joints[0].bend_gain,
                                     g.arm.joints[1].bend_gain};
  std::array<double, 2> max_pressure = {g.arm.joints[0].max_pressure,
                                        g.arm.joints[1].max_pressure};
  o.get("bend_gain", bend_gain);
  o.get("max_pressure", max_pressure);
  for (std::size_t i = 0; i < 2; ++i) {
    g.arm.joints[i].bend_gain = bend_gain[i];
    g.arm.joints[i].max_pressure = max_pressure[i];
  }
  o.get("lag_tau", g.arm.lag_tau);
  o.get("link_length", g.arm.link_length);
  o.get("box_stiffness", g.box.stiffness);
  o.get("crush_threshold", g.box.crush_threshold);
  o.get("box_width", g.box.width);
  o.get("duration", g.traj.duration);
  o.get("ramp_time", g.traj.ramp_time);
  o.get("p_plus_peak", g.traj.p_plus_peak);
  o.get("p_minus", g.traj.p_minus);
  o.get("arm_span", g.contact.arm_span);
  o.get("chest_closure", g.contact.chest_closure);
  o.get("chest_share", g.contact.chest_share);
  o.get("wrap_ratio", g.contact.wrap_ratio);
  o.get("wrap_sharpness", g.contact.wrap_sharpness);
  o.get("mid_onset_fraction", g.contact.mid_onset_fraction);
  o.get("patch_rows", g.contact.patch_rows);
  o.get("patch_cols", g.contact.patch_cols);
  o.get("taxel_area", g.contact.taxel_area);
  o.get("k_p", g.k_p);
  if (const json* v = o.find("law")) parse_law(*v, "grasp.law", g.sensing.law);
  if (const json* v = o.find("drive"))
    parse_drive(*v, "grasp.drive", g.sensing.drive);
  if (const json* v = o.find("adc")) parse_adc(*v, "grasp.adc", g.sensing.adc);
  if (const json* v = o.find("bus")) parse_bus(*v, "grasp.bus", g.sensing.bus);
  if (const json* v = o.find("hampel"))
    parse_hampel(*v, "grasp.hampel", g.sensing.hampel);
  o.done();
}

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

void RunConfig::validate() const {
  if (rows < 1 || rows > 16) throw ConfigError("array.rows must be in 1..16");
  if (cols < 1 || cols > 64) throw ConfigError("array.cols must be in 1..64");
  law.validate();
  drive.validate();
  adc.validate();
  bus.validate();
  hampel.validate();
  latency.validate();

  auto in_range = [&](const TaxelCoord& c) {
    return c.first < rows && c.second < cols;
  };
  if (!in_range(crosstalk.ghost))
    throw ConfigError("crosstalk.ghost out of array range");
  for (const TaxelCoord& c : crosstalk.pressed) {
    if (!in_range(c)) throw ConfigError("crosstalk.pressed out of array range");
    if (c == crosstalk.ghost)
      throw ConfigError("crosstalk.ghost must not be pressed");
  }
  if (!(crosstalk.pressure_kpa > 0.0))
    throw ConfigError("crosstalk.pressure must be > 0");

  if (gain.rf_values.empty())
    throw ConfigError("gain.rf_values must not be empty");
  for (std::size_t i = 0; i < gain.rf_values.size(); ++i) {
    if (!(gain.rf_values[i] > 0.0))
      throw ConfigError("gain.rf_values must be > 0");
    if (i > 0 && !(gain.rf_values[i] > gain.rf_values[i - 1]))
      throw ConfigError("gain.rf_values must be strictly increasing");
  }
  if (!(gain.load_pressure > 0.0))
    throw ConfigError("gain.load_pressure must be > 0");
  if (gain.load_rows < 1 || gain.load_rows > rows)
    throw ConfigError("gain.load_rows must fit the array");
  if (gain.load_cols < 1 || gain.load_cols > cols)
    throw ConfigError("gain.load_cols must fit the array");

  if (!(scan.uniform_pressure >= 0.0))
    throw ConfigError("scan.uniform_pressure must be >= 0");
  if (!(scan.pressed_pressure > 0.0))
    throw ConfigError("scan.pressed_pressure must be > 0");
  for (const TaxelCoord& c : scan.pressed)
    if (!in_range(c)) throw ConfigError("scan.pressed out of array range");

  validate_grasp_config(grasp);
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg = default_run_config();
  Obj o(j, "config");
  if (const json* v = o.find("array")) {
    Obj a(*v, "array");
    a.get("rows", cfg.rows);
    a.get("cols", cfg.cols);
    a.done();
  }
  if (const json* v = o.find("law")) parse_law(*v, "law", cfg.law);
  if (const json* v = o.find("drive")) parse_drive(*v, "drive", cfg.drive);
  if (const json* v = o.find("adc")) parse_adc(*v, "adc", cfg.adc);
  if (const json* v = o.find("bus")) parse_bus(*v, "bus", cfg.bus);
  if (const json* v = o.find("hampel")) parse_hampel(*v, "hampel", cfg.hampel);
  if (const json* v = o.find("crosstalk")) {
    Obj c(*v, "crosstalk");
    c.get("pressed", cfg.crosstalk.pressed);
    c.get("ghost", cfg.crosstalk.ghost);
    c.get("pressure", cfg.crosstalk.pressure_kpa);
    c.done();
  }
  if (const json* v = o.find("gain")) {
    Obj g(*v, "gain");
    g.get("rf_values", cfg.gain.rf_values);
    g.get("load_pressure", cfg.gain.load_pressure);
    g.get("load_rows", cfg.gain.load_rows);
    g.get("load_cols", cfg.gain.load_cols);
    g.done();
  }
  if (const json* v = o.find("latency")) {
    Obj l(*v, "latency");
    l.get("ft_rate", cfg.latency.ft_rate);
    l.get("tactile_rate", cfg.latency.tactile_rate);
    l.get("true_latency", cfg.latency.true_latency);
    l.get("trials", cfg.latency.trials);
    l.get("pulse_width", cfg.latency.impact.width);
    l.get("pulse_amplitude", cfg.latency.impact.amplitude);
    l.get("injected_jitter", cfg.latency.injected_jitter);
    l.done();
  }
  if (const json* v = o.find("scan")) {
    Obj s(*v, "scan");
    s.get("frames", cfg.scan.n_frames);
    s.get("uniform_pressure", cfg.scan.uniform_pressure);
    s.get("pressed", cfg.scan.pressed);
    s.get("pressed_pressure", cfg.scan.pressed_pressure);
    s.done();
  }
  if (const json* v = o.find("grasp")) parse_grasp(*v, cfg.grasp);
  o.get("rng_seed", cfg.rng_seed);
  o.get("output_dir", cfg.output_dir);
  o.done();

  cfg.latency.rng_seed = cfg.rng_seed;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

namespace {

json law_to_json(const ResistanceLaw& law) {
  return {{"r_max", law.r_max}, {"r_min", law.r_min}, {"k", law.k}};
}

json drive_to_json(const DriveConfig& d) {
  return {{"v_in", d.v_in},
          {"r_switch_on", d.r_switch_on},
          {"r_mux16", d.r_mux16},
          {"r_mux4", d.r_mux4},
          {"r_f", d.r_f},
          {"mode", d.mode == DriveMode::kMitigated ? "mitigated" : "naive"},
          {"r_pulldown", d.r_pulldown},
          {"r_leak", d.r_leak},
          {"col_mux_offset", d.col_mux_offset}};
}

json adc_to_json(const AdcConfig& a) {
  return {{"bits", a.bits}, {"v_ref", a.v_ref}};
}

json bus_to_json(const BusConfig& b) {
  return {{"n_peripherals", b.n_peripherals},
          {"spi_clock_hz", b.spi_clock_hz},
          {"bits_per_transfer", b.bits_per_transfer},
          {"t_proc", b.t_proc},
          {"t_delay", b.t_delay},
          {"n_in", b.n_in},
          {"n_out", b.n_out},
          {"integrity_limit_hz", b.integrity_limit_hz},
          {"per_frame_overhead", b.per_frame_overhead}};
}

json hampel_to_json(const HampelConfig& h) {
  return {{"window", h.window},
          {"k", h.k},
          {"mad_scale", h.mad_scale},
          {"mad_floor", h.mad_floor}};
}

json coords_to_json(const std::vector<TaxelCoord>& coords) {
  json a = json::array();
  for (const TaxelCoord& c : coords) a.push_back({c.first, c.second});
  return a;
}

}  // namespace

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["array"] = {{"rows", cfg.rows}, {"cols", cfg.cols}};
  j["law"] = law_to_json(cfg.law);
  j["drive"] = drive_to_json(cfg.drive);
  j["adc"] = adc_to_json(cfg.adc);
  j["bus"] = bus_to_json(cfg.bus);
  j["hampel"] = hampel_to_json(cfg.hampel);
  j["crosstalk"] = {{"pressed", coords_to_json(cfg.crosstalk.pressed)},
                    {"ghost", {cfg.crosstalk.ghost.first, cfg.crosstalk.ghost.second}},
                    {"pressure", cfg.crosstalk.pressure_kpa}};
  j["gain"] = {{"rf_values", cfg.gain.rf_values},
               {"load_pressure", cfg.gain.load_pressure},
               {"load_rows", cfg.gain.load_rows},
               {"load_cols", cfg.gain.load_cols}};
  j["latency"] = {{"ft_rate", cfg.latency.ft_rate},
                  {"tactile_rate", cfg.latency.tactile_rate},
                  {"true_latency", cfg.latency.true_latency},
                  {"trials", cfg.latency.trials},
                  {"pulse_width", cfg.latency.impact.width},
                  {"pulse_amplitude", cfg.latency.impact.amplitude},
                  {"injected_jitter", cfg.latency.injected_jitter}};
  j["scan"] = {{"frames", cfg.scan.n_frames},
               {"uniform_pressure", cfg.scan.uniform_pressure},
               {"pressed", coords_to_json(cfg.scan.pressed)},
               {"pressed_pressure", cfg.scan.pressed_pressure}};
  j["grasp"] = {
      {"bend_gain",
       {cfg.grasp.arm.joints[0].bend_gain, cfg.grasp.arm.joints[1].bend_gain}},
      {"max_pressure",
       {cfg.grasp.arm.joints[0].max_pressure, cfg.grasp.arm.joints[1].max_pressure}},
      {"lag_tau", cfg.grasp.arm.lag_tau},
      {"link_length", cfg.grasp.arm.link_length},
      {"box_stiffness", cfg.grasp.box.stiffness},
      {"crush_threshold", cfg.grasp.box.crush_threshold},
      {"box_width", cfg.grasp.box.width},
      {"duration", cfg.grasp.traj.duration},
      {"ramp_time", cfg.grasp.traj.ramp_time},
      {"p_plus_peak", cfg.grasp.traj.p_plus_peak},
      {"p_minus", cfg.grasp.traj.p_minus},
      {"arm_span", cfg.grasp.contact.arm_span},
      {"chest_closure", cfg.grasp.contact.chest_closure},
      {"chest_share", cfg.grasp.contact.chest_share},
      {"wrap_ratio", cfg.grasp.contact.wrap_ratio},
      {"wrap_sharpness", cfg.grasp.contact.wrap_sharpness},
      {"mid_onset_fraction", cfg.grasp.contact.mid_onset_fraction},
      {"patch_rows", cfg.grasp.contact.patch_rows},
      {"patch_cols", cfg.grasp.contact.patch_cols},
      {"taxel_area", cfg.grasp.contact.taxel_area},
      {"k_p", cfg.grasp.k_p},
      {"law", law_to_json(cfg.grasp.sensing.law)},
      {"drive", drive_to_json(cfg.grasp.sensing.drive)},
      {"adc", adc_to_json(cfg.grasp.sensing.adc)},
      {"bus", bus_to_json(cfg.grasp.sensing.bus)},
      {"hampel", hampel_to_json(cfg.grasp.sensing.hampel)}};
  j["rng_seed"] = cfg.rng_seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace taxsim
