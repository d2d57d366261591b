// SPDX-License-Identifier: Apache-2.0
//
// taxsim: simulator of a fabric tactile sensing stack. Subcommands cover the
// characterization experiments (framerate, crosstalk, gain, latency), the
// full acquisition pipeline (scan), the closed-loop grasp ablation (grasp)
// and the wire-format codec tools (encode, decode).

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "taxsim/config.hpp"
#include "taxsim/csv.hpp"
#include "taxsim/errors.hpp"
#include "taxsim/experiments.hpp"
#include "taxsim/grasp.hpp"
#include "taxsim/pipeline.hpp"
#include "taxsim/scan_bus.hpp"
#include "taxsim/wire.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace taxsim;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

RunConfig effective_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty() ? default_run_config()
                                           : load_run_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.has_seed) {
    cfg.rng_seed = opts.seed;
    cfg.latency.rng_seed = opts.seed;
  }
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  return cfg;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.output_dir) / name;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    json extra = json::object()) {
  json m;
  m["command"] = command;
  m["seed"] = cfg.rng_seed;
  m["config"] = run_config_to_json(cfg);
  for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = *it;
  std::ofstream f(out_path(cfg, command + "_manifest.json"));
  f << m.dump(2) << "\n";
}

void warn_integrity(double clock_hz, double limit_hz) {
  std::fprintf(stderr,
               "warning: SPI clock %.3g Hz exceeds the signal-integrity limit "
               "%.3g Hz; timing is simulated but a real link would degrade\n",
               clock_hz, limit_hz);
}

std::vector<double> parse_clock_list(const std::string& text) {
  std::vector<double> clocks;
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t next = text.find(',', at);
    if (next == std::string::npos) next = text.size();
    const std::string tok = text.substr(at, next - at);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      clocks.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad clock value: " + tok);
    }
    at = next + 1;
  }
  if (clocks.empty()) throw ConfigError("empty clock list");
  return clocks;
}

// "1..8" or "2,4,6"
std::vector<unsigned> parse_n_list(const std::string& text) {
  std::vector<unsigned> ns;
  const std::size_t dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const unsigned lo = std::stoul(text.substr(0, dots));
      const unsigned hi = std::stoul(text.substr(dots + 2));
      if (lo < 1 || hi < lo) throw std::invalid_argument(text);
      for (unsigned n = lo; n <= hi; ++n) ns.push_back(n);
    } else {
      std::size_t at = 0;
      while (at < text.size()) {
        std::size_t next = text.find(',', at);
        if (next == std::string::npos) next = text.size();
        ns.push_back(std::stoul(text.substr(at, next - at)));
        at = next + 1;
      }
    }
  } catch (const std::exception&) {
    throw ConfigError("bad sensor-count range: " + text);
  }
  if (ns.empty()) throw ConfigError("empty sensor-count range");
  return ns;
}

PressureField scan_stimulus(const RunConfig& cfg) {
  PressureField f =
      PressureField::uniform(cfg.rows, cfg.cols, cfg.scan.uniform_pressure);
  for (const TaxelCoord& c : cfg.scan.pressed)
    f.at(c.first, c.second) = cfg.scan.pressed_pressure;
  return f;
}

// ---- commands --------------------------------------------------------------

int cmd_scan(const RunConfig& cfg, const std::string& capture_path,
             bool realtime) {
  if (cfg.bus.taxels() != kCodesPerSensor)
    throw ConfigError("bus.n_in x bus.n_out must be 1024 for the wire format");
  if (cfg.rows != cfg.bus.n_in || cfg.cols != cfg.bus.n_out)
    throw ConfigError("array dimensions must match the bus for scan");
  if (cfg.bus.exceeds_integrity_limit())
    warn_integrity(cfg.bus.spi_clock_hz, cfg.bus.integrity_limit_hz);

  const ResistanceGrid grid = grid_from_pressure(scan_stimulus(cfg), cfg.law);
  const std::vector<ResistanceGrid> grids(cfg.bus.n_peripherals, grid);
  const auto batches = acquire_frames(grids, cfg.drive, cfg.adc, cfg.bus,
                                      cfg.scan.n_frames);
  const double frame_period =
      total_scan_time(cfg.bus) + cfg.bus.per_frame_overhead;

  std::vector<std::uint8_t> capture;
  StreamDecoder decoder;
  PipelineState filter(cfg.hampel);

  CsvWriter frames_csv(out_path(cfg, "scan_frames.csv").string());
  frames_csv.line("t,sensor_id,taxel_index,raw,filtered,replaced");
  CsvWriter summary_csv(out_path(cfg, "scan_summary.csv").string());
  summary_csv.line("sensor_id,frame,normalized_total_activation");

  std::vector<std::uint8_t> replaced;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    // pacing only; simulated timestamps stay on the deterministic grid
    if (realtime)
      std::this_thread::sleep_for(std::chrono::duration<double>(frame_period));
    const auto bytes = encode_message(batches[b].frames);
    capture.insert(capture.end(), bytes.begin(), bytes.end());

    const auto messages = decoder.push(bytes);
    for (const Message& msg : messages) {
      for (std::size_t s = 0; s < msg.n_sensors(); ++s) {
        Frame raw;
        raw.sensor_id = msg.sensor_ids[s];
        raw.t_acquired = batches[b].t;
        const auto codes = msg.sensor_codes(s);
        raw.codes.assign(codes.begin(), codes.end());

        const Frame filtered = filter.filter_frame(raw, &replaced);
        for (std::size_t t = 0; t < raw.codes.size(); ++t) {
          frames_csv.row({csv_num(raw.t_acquired),
                          csv_num(static_cast<unsigned>(raw.sensor_id)),
                          csv_num(static_cast<std::uint64_t>(t)),
                          csv_num(static_cast<unsigned>(raw.codes[t])),
                          csv_num(static_cast<unsigned>(filtered.codes[t])),
                          csv_num(static_cast<unsigned>(replaced[t]))});
        }
        summary_csv.row({csv_num(static_cast<unsigned>(raw.sensor_id)),
                         csv_num(static_cast<std::uint64_t>(b)),
                         csv_num(normalized_total_activation(filtered))});
      }
    }
  }

  if (!capture_path.empty()) {
    std::ofstream f(capture_path, std::ios::binary);
    if (!f) throw ConfigError("cannot write capture file: " + capture_path);
    f.write(reinterpret_cast<const char*>(capture.data()),
            static_cast<std::streamsize>(capture.size()));
  }

  write_manifest(cfg, "scan",
                 {{"frames", cfg.scan.n_frames},
                  {"frame_period_s", total_scan_time(cfg.bus)},
                  {"replaced_samples", filter.replaced_count()}});
  return 0;
}

int cmd_framerate(const RunConfig& cfg, std::string clocks_text,
                  std::string n_text) {
  if (clocks_text.empty()) clocks_text = "7e6,14e6,28e6,42e6";
  if (n_text.empty()) n_text = "1..8";
  const std::vector<double> clocks = parse_clock_list(clocks_text);
  const std::vector<unsigned> ns = parse_n_list(n_text);

  for (double clock : clocks)
    if (clock > cfg.bus.integrity_limit_hz)
      warn_integrity(clock, cfg.bus.integrity_limit_hz);

  const auto table = framerate_sweep(clocks, ns, cfg.bus);

  CsvWriter csv(out_path(cfg, "framerate.csv").string());
  csv.line("clock_hz,n,fps");
  for (const FrameRateCell& cell : table)
    csv.row({csv_num(cell.clock_hz), csv_num(cell.n), csv_num(cell.fps)});

  json extra = {{"cells", table.size()}};
  if (cfg.bus.per_frame_overhead > 0.0) {
    // the pure bus model above; host overhead shifts the realized rate
    json adjusted = json::array();
    for (const FrameRateCell& cell : table) {
      BusConfig bus = cfg.bus;
      bus.spi_clock_hz = cell.clock_hz;
      bus.n_peripherals = cell.n;
      adjusted.push_back({{"clock_hz", cell.clock_hz},
                          {"n", cell.n},
                          {"adjusted_fps",
                           1.0 / (total_scan_time(bus) + bus.per_frame_overhead)}});
    }
    extra["adjusted_rates"] = adjusted;
  }
  write_manifest(cfg, "framerate", extra);
  return 0;
}

int cmd_crosstalk(const RunConfig& cfg, const std::string& mode) {
  DriveConfig drive = cfg.drive;
  std::string label = mode;
  if (mode == "mitigated") {
    drive.mode = DriveMode::kMitigated;
  } else if (mode == "naive") {
    drive.mode = DriveMode::kNaive;
  } else if (mode == "ideal") {
    drive.mode = DriveMode::kMitigated;
    drive.r_switch_on = 0.0;
    drive.r_mux16 = 0.0;
    drive.r_mux4 = 0.0;
    drive.col_mux_offset.clear();
  } else {
    throw ConfigError("crosstalk mode must be mitigated, naive or ideal");
  }

  const CrosstalkReport report = crosstalk_experiment(
      cfg.law, drive, cfg.adc, cfg.rows, cfg.cols, cfg.crosstalk);

  CsvWriter csv(out_path(cfg, "crosstalk.csv").string());
  csv.line("mode,pressed_mean,ghost_mean,crosstalk_pct");
  csv.row({label, csv_num(report.pressed_mean_code),
           csv_num(report.ghost_mean_code), csv_num(report.crosstalk_pct)});

  write_manifest(cfg, "crosstalk",
                 {{"mode", label},
                  {"baseline_code", report.baseline_code},
                  {"crosstalk_pct", report.crosstalk_pct}});
  return 0;
}

int cmd_gain(const RunConfig& cfg) {
  PressureField load = PressureField::uniform(cfg.rows, cfg.cols, 0.0);
  const std::size_t r0 = (cfg.rows - cfg.gain.load_rows) / 2;
  const std::size_t c0 = (cfg.cols - cfg.gain.load_cols) / 2;
  for (std::size_t r = 0; r < cfg.gain.load_rows; ++r)
    for (std::size_t c = 0; c < cfg.gain.load_cols; ++c)
      load.at(r0 + r, c0 + c) = cfg.gain.load_pressure;

  const auto table =
      gain_sweep(cfg.law, cfg.drive, cfg.adc, load, cfg.gain.rf_values);

  CsvWriter csv(out_path(cfg, "gain.csv").string());
  csv.line("r_f,activation");
  for (const GainCell& cell : table)
    csv.row({csv_num(cell.r_f), csv_num(cell.activation)});

  write_manifest(cfg, "gain",
                 {{"loaded_taxels", cfg.gain.load_rows * cfg.gain.load_cols}});
  return 0;
}

int cmd_latency(const RunConfig& cfg) {
  const LatencyReport report = run_latency_trials(cfg.latency);
  const std::vector<double> rates = {cfg.latency.tactile_rate,
                                     cfg.latency.ft_rate};
  const double sigma_quant = quantization_uncertainty(rates);
  const double sigma_true = jitter_decompose(report.sigma_measured, sigma_quant);

  CsvWriter samples(out_path(cfg, "latency_samples.csv").string());
  samples.line("# seed=" + std::to_string(cfg.latency.rng_seed));
  samples.line("trial,latency_s");
  for (std::size_t i = 0; i < report.samples.size(); ++i)
    samples.row({csv_num(static_cast<std::uint64_t>(i)),
                 csv_num(report.samples[i])});

  CsvWriter summary(out_path(cfg, "latency_summary.csv").string());
  summary.line("mean,sigma_measured,sigma_quant,sigma_true");
  summary.row({csv_num(report.mean), csv_num(report.sigma_measured),
               csv_num(sigma_quant), csv_num(sigma_true)});

  write_manifest(cfg, "latency",
                 {{"mean_s", report.mean},
                  {"sigma_measured_s", report.sigma_measured},
                  {"sigma_quant_s", sigma_quant},
                  {"sigma_true_s", sigma_true}});
  return 0;
}

const char* kJointLabels[2][2] = {{"L1", "L2"}, {"R1", "R2"}};

void write_grasp_outputs(const RunConfig& cfg, const GraspReport& report,
                         const std::string& tag) {
  CsvWriter series(out_path(cfg, "grasp_" + tag + "_timeseries.csv").string());
  series.line("t,joint,p_plus_cmd,p_minus,deformation,damage");
  for (const GraspTimePoint& p : report.series) {
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t j = 0; j < 2; ++j) {
        series.row({csv_num(p.t), kJointLabels[a][j],
                    csv_num(p.p_plus_cmd[a][j]), csv_num(p.p_minus[j]),
                    csv_num(p.deformation), csv_num(p.damage ? 1 : 0)});
      }
    }
  }

  CsvWriter summary(out_path(cfg, "grasp_" + tag + "_summary.csv").string());
  summary.line("sensor_id,mean_normalized_total_activation");
  for (std::size_t s = 0; s < kGraspSensors; ++s)
    summary.row({csv_num(static_cast<std::uint64_t>(s)),
                 csv_num(report.mean_activation[s])});
}

json grasp_result_json(const GraspReport& report) {
  json labels = json::object();
  for (std::size_t s = 0; s < kGraspSensors; ++s)
    labels[std::to_string(s)] = kGraspSensorLabels[s];
  return {{"damage", report.damage},
          {"peak_deformation_m", report.peak_deformation},
          {"peak_contact_force_n", report.peak_contact_force},
          {"sensor_labels", labels}};
}

int cmd_grasp(const RunConfig& cfg, const std::string& feedback,
              double kp_override) {
  GraspConfig grasp = cfg.grasp;
  if (kp_override >= 0.0) grasp.k_p = kp_override;
  if (grasp.sensing.bus.exceeds_integrity_limit())
    warn_integrity(grasp.sensing.bus.spi_clock_hz,
                   grasp.sensing.bus.integrity_limit_hz);

  json extra = {{"k_p", grasp.k_p},
                {"frame_period_s", total_scan_time(grasp.sensing.bus)}};
  if (feedback == "both" || feedback == "off") {
    const GraspReport open = run_grasp(grasp, false);
    write_grasp_outputs(cfg, open, "open");
    extra["open_loop"] = grasp_result_json(open);
  }
  if (feedback == "both" || feedback == "on") {
    const GraspReport closed = run_grasp(grasp, true);
    write_grasp_outputs(cfg, closed, "closed");
    extra["closed_loop"] = grasp_result_json(closed);
  }
  if (feedback != "both" && feedback != "on" && feedback != "off")
    throw ConfigError("grasp feedback must be both, on or off");

  write_manifest(cfg, "grasp", extra);
  return 0;
}

int cmd_decode(const RunConfig& cfg, const std::string& input) {
  std::ifstream f(input, std::ios::binary);
  if (!f) throw ConfigError("cannot open capture file: " + input);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

  StreamDecoder decoder;
  std::vector<Message> messages = decoder.push(bytes);
  const auto tail = decoder.finish();
  messages.insert(messages.end(), tail.begin(), tail.end());

  CsvWriter csv(out_path(cfg, "decoded.csv").string());
  csv.line("message,sensor_id,taxel_index,code");
  for (std::size_t m = 0; m < messages.size(); ++m) {
    const Message& msg = messages[m];
    for (std::size_t s = 0; s < msg.n_sensors(); ++s) {
      const auto codes = msg.sensor_codes(s);
      for (std::size_t t = 0; t < codes.size(); ++t)
        csv.row({csv_num(static_cast<std::uint64_t>(m)),
                 csv_num(static_cast<unsigned>(msg.sensor_ids[s])),
                 csv_num(static_cast<std::uint64_t>(t)),
                 csv_num(static_cast<unsigned>(codes[t]))});
    }
  }

  const DecodeDiagnostics& d = decoder.diagnostics();
  std::fprintf(stderr,
               "decoded %llu message(s), skipped %llu byte(s), "
               "%llu malformed candidate(s)\n",
               static_cast<unsigned long long>(d.messages_ok),
               static_cast<unsigned long long>(d.bytes_skipped),
               static_cast<unsigned long long>(d.malformed));

  write_manifest(cfg, "decode",
                 {{"input", input},
                  {"messages_ok", d.messages_ok},
                  {"bytes_skipped", d.bytes_skipped},
                  {"malformed", d.malformed}});
  return 0;
}

int cmd_encode(const RunConfig& cfg, const std::string& input,
               std::string output) {
  if (output.empty()) output = out_path(cfg, "capture.bin").string();

  std::ifstream f(input);
  if (!f) throw ConfigError("cannot open csv file: " + input);

  // rows ordered by message; sensors appear in first-seen order
  std::map<std::uint64_t, Message> messages;
  std::string line;
  std::getline(f, line);  // header
  if (line != "message,sensor_id,taxel_index,code")
    throw ConfigError("expected header message,sensor_id,taxel_index,code");
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    unsigned long long m = 0, id = 0, taxel = 0, code = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu,%llu", &m, &id, &taxel,
                    &code) != 4)
      throw ConfigError("bad csv row at line " + std::to_string(line_no));
    Message& msg = messages[m];
    const auto id8 = static_cast<std::uint8_t>(id);
    std::size_t slot = msg.sensor_ids.size();
    for (std::size_t s = 0; s < msg.sensor_ids.size(); ++s)
      if (msg.sensor_ids[s] == id8) slot = s;
    if (slot == msg.sensor_ids.size()) {
      if (id > kMaxSensorId)
        throw ConfigError("sensor id out of range at line " +
                          std::to_string(line_no));
      msg.sensor_ids.push_back(id8);
      msg.codes.resize(msg.sensor_ids.size() * kCodesPerSensor, 0);
    }
    if (taxel >= kCodesPerSensor || code > kMaxCode)
      throw ConfigError("taxel or code out of range at line " +
                        std::to_string(line_no));
    msg.codes[slot * kCodesPerSensor + taxel] =
        static_cast<std::uint16_t>(code);
  }
  if (messages.empty()) throw ConfigError("no rows in " + input);

  std::ofstream out(output, std::ios::binary);
  if (!out) throw ConfigError("cannot write capture file: " + output);
  std::uint64_t n = 0;
  for (const auto& [index, msg] : messages) {
    const auto bytes = encode_message(msg);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    ++n;
  }

  write_manifest(cfg, "encode",
                 {{"input", input}, {"output", output}, {"messages", n}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fabric tactile sensing stack simulator"};
  app.require_subcommand(1);
  // global options are accepted before or after the subcommand name
  app.fallthrough();

  CommonOpts common;
  app.add_option("--config", common.config_path, "JSON configuration file");
  app.add_option("--out", common.out_dir, "output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", common.seed, "RNG seed override");

  auto* scan = app.add_subcommand("scan", "acquire, decode and filter frames");
  std::string capture_path;
  std::size_t frames_override = 0;
  bool realtime = false;
  scan->add_option("--frames", frames_override, "number of frames to acquire");
  scan->add_option("--capture", capture_path, "also dump the raw wire bytes");
  scan->add_flag("--realtime", realtime,
                 "pace replay at the simulated frame period");

  auto* framerate =
      app.add_subcommand("framerate", "frame-rate model sweep over N and clock");
  std::string clocks_text, n_text;
  framerate->add_option("--clocks", clocks_text, "comma-separated clock list");
  framerate->add_option("--n", n_text, "sensor counts, e.g. 1..8 or 2,4,8");

  auto* crosstalk =
      app.add_subcommand("crosstalk", "ghost reading for a pressed pattern");
  std::string mode = "mitigated";
  crosstalk->add_option("--mode", mode, "mitigated, naive or ideal");

  auto* gain = app.add_subcommand("gain", "activation sweep over r_f");

  auto* latency =
      app.add_subcommand("latency", "end-to-end latency and jitter trials");
  unsigned trials_override = 0;
  latency->add_option("--trials", trials_override, "number of trials");

  auto* grasp = app.add_subcommand("grasp", "open vs closed loop box grasp");
  std::string feedback = "both";
  double kp_override = -1.0;
  grasp->add_option("--feedback", feedback, "both, on or off");
  grasp->add_option("--kp", kp_override, "feedback gain override");

  auto* decode = app.add_subcommand("decode", "capture file to CSV");
  std::string decode_input;
  decode->add_option("input", decode_input, "raw capture file")->required();

  auto* encode = app.add_subcommand("encode", "CSV to capture file");
  std::string encode_input, encode_output;
  encode->add_option("input", encode_input, "CSV of message,sensor_id,taxel_index,code")
      ->required();
  encode->add_option("-o,--output", encode_output, "output capture file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    common.has_seed = seed_opt->count() > 0;
    RunConfig cfg = effective_config(common);

    if (*scan) {
      if (frames_override > 0) cfg.scan.n_frames = frames_override;
      return cmd_scan(cfg, capture_path, realtime);
    }
    if (*framerate) return cmd_framerate(cfg, clocks_text, n_text);
    if (*crosstalk) return cmd_crosstalk(cfg, mode);
    if (*gain) return cmd_gain(cfg);
    if (*latency) {
      if (trials_override > 0) cfg.latency.trials = trials_override;
      return cmd_latency(cfg);
    }
    if (*grasp) return cmd_grasp(cfg, feedback, kp_override);
    if (*decode) return cmd_decode(cfg, decode_input);
    if (*encode) return cmd_encode(cfg, encode_input, encode_output);
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
