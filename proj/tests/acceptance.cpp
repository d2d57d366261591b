// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one check per release criterion, each printed as a
// single [PASS]/[FAIL] line. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "oracle_nodal.hpp"
#include "taxsim/crossbar.hpp"
#include "taxsim/experiments.hpp"
#include "taxsim/grasp.hpp"
#include "taxsim/pipeline.hpp"
#include "taxsim/rng.hpp"
#include "taxsim/scan_bus.hpp"
#include "taxsim/wire.hpp"

namespace fs = std::filesystem;
using namespace taxsim;

namespace {

int g_failures = 0;

void report(int number, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", ok ? "PASS" : "FAIL", number, name,
              detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

BusConfig bus_n(unsigned n) {
  BusConfig b;
  b.n_peripherals = n;
  return b;
}

// ---- 1: closed-form timing model -------------------------------------------

void criterion_timing() {
  // hand evaluations of 1024 * (N * (16/14e6 + 1.08e-6) + 1e-6)
  struct Anchor {
    unsigned n;
    double t;
  };
  const Anchor anchors[] = {{8, 1.9233645714285714e-2},
                            {1, 3.3002057142857143e-3},
                            {3, 7.8526171428571429e-3}};
  bool ok = true;
  std::string detail;
  for (const Anchor& a : anchors) {
    const double t = total_scan_time(bus_n(a.n));
    const double rel = std::abs(t - a.t) / a.t;
    ok = ok && rel < 1e-4;  // agreement to well past 4 significant figures
    detail += fmt("N=%u %.4g ms (rel %.1e)  ", a.n, 1e3 * t, rel);
  }
  const double fps8 = 1.0 / total_scan_time(bus_n(8));
  const bool near_measured = std::abs(fps8 - 53.0) / 53.0 < 0.05;
  ok = ok && near_measured;
  detail += fmt("| N=8 %.1f FPS vs measured 53 (%.1f%% off)", fps8,
                100.0 * std::abs(fps8 - 53.0) / 53.0);
  report(1, "timing model", ok, detail);
}

// ---- 2: frame-rate curve ----------------------------------------------------

void criterion_framerate_curve() {
  bool ok = true;
  double prev = 1e18;
  double worst = 0.0;
  for (unsigned n = 1; n <= 8; ++n) {
    const BusConfig bus = bus_n(n);
    const double fps = 1.0 / total_scan_time(bus);
    const double identity =
        fps * (n * (bus.t_spi() + bus.t_proc) + bus.t_delay) * 1024.0;
    worst = std::max(worst, std::abs(identity - 1.0));
    ok = ok && std::abs(identity - 1.0) < 1e-12;
    ok = ok && fps < prev;
    prev = fps;
  }
  report(2, "frame-rate curve", ok,
         fmt("monotone decreasing over N=1..8, identity residual %.2e", worst));
}

// ---- 3: crosstalk -----------------------------------------------------------

void criterion_crosstalk() {
  const ResistanceLaw law;
  const AdcConfig adc;
  const CrosstalkPattern pattern;

  DriveConfig mitigated;
  DriveConfig naive;
  naive.mode = DriveMode::kNaive;
  DriveConfig ideal;
  ideal.r_switch_on = 0.0;
  ideal.r_mux16 = 0.0;
  ideal.r_mux4 = 0.0;

  const double pct_mit =
      crosstalk_experiment(law, mitigated, adc, 16, 64, pattern).crosstalk_pct;
  const double pct_naive =
      crosstalk_experiment(law, naive, adc, 16, 64, pattern).crosstalk_pct;
  const double pct_ideal =
      crosstalk_experiment(law, ideal, adc, 16, 64, pattern).crosstalk_pct;

  const bool ok =
      pct_mit <= 3.3 && pct_naive >= 10.0 * pct_mit && pct_ideal < 0.01;
  report(3, "crosstalk", ok,
         fmt("mitigated %.3f%% <= 3.3%%, naive %.1f%% >= 10x, ideal %.4f%% < "
             "0.01%%",
             pct_mit, pct_naive, pct_ideal));
}

// ---- 4: circuit solver vs closed form ---------------------------------------

void criterion_solver_oracle() {
  Rng rng(2024);
  const DriveConfig mitigated;
  DriveConfig naive;
  naive.mode = DriveMode::kNaive;

  oracle::Params params;
  params.v_in = mitigated.v_in;
  params.r_switch_on = mitigated.r_switch_on;
  params.r_mux = mitigated.r_mux16 + mitigated.r_mux4;
  params.r_f = mitigated.r_f;
  params.r_leak = mitigated.r_leak;
  params.r_pulldown = mitigated.r_pulldown;

  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    ResistanceGrid g;
    g.rows = 2;
    g.cols = 2;
    g.r.resize(4);
    for (double& r : g.r) r = 100.0 * std::pow(1e4, rng.uniform01());
    const oracle::TwoByTwo rr{g.at(0, 0), g.at(0, 1), g.at(1, 0), g.at(1, 1)};

    const double want_m = oracle::mitigated_2x2(rr, params).v_raw;
    const double got_m = solve_readout_detailed(g, mitigated, 0, 0).v_raw;
    const double rel_m = std::abs(got_m - want_m) / std::abs(want_m);

    const double want_n = oracle::naive_2x2(rr, params).v_raw;
    const double got_n = solve_readout_detailed(g, naive, 0, 0).v_raw;
    const double rel_n = std::abs(got_n - want_n) / std::abs(want_n);

    worst = std::max({worst, rel_m, rel_n});
    ok = ok && rel_m < 1e-9 && rel_n < 1e-9;
  }
  report(4, "circuit solver oracle", ok,
         fmt("100 random 2x2 draws, both modes, worst relative error %.2e",
             worst));
}

// ---- 5: codec ---------------------------------------------------------------

Message random_message(Rng& rng) {
  Message m;
  const std::size_t n = 1 + rng.below(kMaxSensors);
  while (m.sensor_ids.size() < n) {
    const auto id = static_cast<std::uint8_t>(rng.below(kMaxSensorId + 1));
    bool dup = false;
    for (std::uint8_t seen : m.sensor_ids) dup = dup || seen == id;
    if (!dup) m.sensor_ids.push_back(id);
  }
  m.codes.resize(n * kCodesPerSensor);
  for (auto& c : m.codes)
    c = static_cast<std::uint16_t>(rng.below(kMaxCode + 1));
  return m;
}

void criterion_codec() {
  Rng rng(555);
  bool ok = true;

  // roundtrip identity and the size law over 10,000 random messages
  for (int i = 0; i < 10000 && ok; ++i) {
    const Message m = random_message(rng);
    const auto bytes = encode_message(m);
    ok = ok && bytes.size() == 2 + 2 + m.n_sensors() + 2048 * m.n_sensors();
    StreamDecoder dec;
    const auto out = dec.push(bytes);
    ok = ok && out.size() == 1 && out[0].sensor_ids == m.sensor_ids &&
         out[0].codes == m.codes;
  }

  // fuzz: random prefix and interleaved corruption never costs a message
  std::size_t recovered = 0, sent_total = 0;
  for (int round = 0; round < 60; ++round) {
    std::vector<std::uint8_t> stream;
    std::vector<Message> sent;
    const int k = 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < k; ++i) {
      const std::size_t junk = rng.below(64);
      for (std::size_t b = 0; b < junk; ++b)
        stream.push_back(static_cast<std::uint8_t>(rng.below(256)));
      sent.push_back(random_message(rng));
      const auto bytes = encode_message(sent.back());
      stream.insert(stream.end(), bytes.begin(), bytes.end());
    }
    StreamDecoder dec;
    auto out = dec.push(stream);
    const auto tail = dec.finish();
    out.insert(out.end(), tail.begin(), tail.end());
    sent_total += sent.size();
    if (out.size() == sent.size()) {
      bool same = true;
      for (std::size_t i = 0; i < out.size(); ++i)
        same = same && out[i].sensor_ids == sent[i].sensor_ids &&
               out[i].codes == sent[i].codes;
      if (same) recovered += out.size();
    }
  }
  ok = ok && recovered == sent_total;
  report(5, "codec", ok,
         fmt("10000 roundtrips, size law, fuzz recovery %zu/%zu", recovered,
             sent_total));
}

// ---- 6: outlier filter -------------------------------------------------------

void criterion_hampel() {
  const std::vector<std::uint16_t> window = {4, 1, 3, 2, 100};
  const HampelResult hand = hampel_update(window, HampelConfig{});
  bool ok = hand.replaced && hand.value == 3;

  Rng rng(888);
  PipelineState state{HampelConfig{}};
  const std::uint16_t base = 900;
  std::uint64_t spikes = 0, caught = 0, false_hits = 0;
  for (int frame = 0; frame < 100; ++frame) {
    Frame f;
    f.sensor_id = 0;
    f.codes.assign(1024, base);
    std::vector<bool> spiked(1024, false);
    if (frame >= 2) {
      for (std::size_t t = 0; t < 1024; ++t) {
        if (rng.uniform01() < 0.01) {
          f.codes[t] = base + 2000;
          spiked[t] = true;
          ++spikes;
        }
      }
    }
    const Frame out = state.filter_frame(f);
    for (std::size_t t = 0; t < 1024; ++t) {
      if (spiked[t] && out.codes[t] == base) ++caught;
      if (!spiked[t] && out.codes[t] != base) ++false_hits;
    }
  }
  const double suppression =
      spikes ? 100.0 * static_cast<double>(caught) / spikes : 0.0;
  ok = ok && suppression >= 99.0 && false_hits == 0;
  report(6, "hampel filter", ok,
         fmt("hand window -> (3, replaced); %.2f%% of %llu spikes suppressed, "
             "%llu false replacements",
             suppression, static_cast<unsigned long long>(spikes),
             static_cast<unsigned long long>(false_hits)));
}

// ---- 7: pipeline throughput --------------------------------------------------

void criterion_throughput() {
  Rng rng(999);
  const std::size_t n_frames = 400;
  std::vector<std::vector<Frame>> batches(n_frames);
  for (auto& batch : batches) {
    batch.resize(8);
    for (std::size_t s = 0; s < 8; ++s) {
      batch[s].sensor_id = static_cast<std::uint8_t>(s);
      batch[s].codes.resize(1024);
      for (auto& c : batch[s].codes)
        c = static_cast<std::uint16_t>(rng.below(4096));
    }
  }

  PipelineState state{HampelConfig{}};
  std::uint64_t sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& batch : batches)
    for (const Frame& f : batch) sink += state.filter_frame(f).codes[0];
  const auto stop = std::chrono::steady_clock::now();
  const double seconds = std::chrono::duration<double>(stop - start).count();
  const double fps = static_cast<double>(n_frames) / seconds;

  report(7, "pipeline throughput", fps >= 50.0,
         fmt("8x1024 taxels filtered at %.0f frames/s single-threaded "
             "(>= 50 required, checksum %llu)",
             fps, static_cast<unsigned long long>(sink)));
}

// ---- 8: latency harness ------------------------------------------------------

void criterion_latency() {
  LatencyTrialConfig cfg;
  cfg.trials = 1000;
  cfg.rng_seed = 4242;
  const LatencyReport rep = run_latency_trials(cfg);

  const bool mean_ok = std::abs(rep.mean - 27.3e-3) <= 4.2e-3;

  const std::vector<double> rates = {120.0, 300.0};
  const double q = quantization_uncertainty(rates);
  const bool q_ok = std::abs(q - 4.5e-3) <= 0.05e-3;

  const double sigma_true = jitter_decompose(4.64e-3, 4.5e-3);
  const bool j_ok = std::abs(sigma_true - 1.13e-3) <= 0.01e-3;

  report(8, "latency harness", mean_ok && q_ok && j_ok,
         fmt("mean %.2f ms (target 27.3 +/- 4.2), combined quantization "
             "%.2f ms (4.5 +/- 0.05), decomposed jitter %.3f ms (1.13 +/- "
             "0.01)",
             1e3 * rep.mean, 1e3 * q, 1e3 * sigma_true));
}

// ---- 9: grasp ablation -------------------------------------------------------

void criterion_grasp() {
  const GraspConfig cfg;
  const GraspReport open = run_grasp(cfg, false);
  const GraspReport closed = run_grasp(cfg, true);

  bool ok = open.damage && !closed.damage &&
            closed.peak_deformation < open.peak_deformation;
  for (std::size_t arm = 0; arm < 2; ++arm) {
    const std::size_t mid = 3 * arm + 1, distal = 3 * arm + 2;
    ok = ok && closed.mean_activation[distal] < open.mean_activation[distal];
    ok = ok && closed.mean_activation[mid] > open.mean_activation[mid];
  }
  report(9, "grasp ablation", ok,
         fmt("open: damage=%d peak %.3f m; closed: damage=%d peak %.3f m; "
             "distal %.2f->%.2f, mid %.3f->%.3f",
             open.damage, open.peak_deformation, closed.damage,
             closed.peak_deformation, open.mean_activation[2],
             closed.mean_activation[2], open.mean_activation[1],
             closed.mean_activation[1]));
}

// ---- 10: reproducibility -----------------------------------------------------

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

std::map<std::string, std::vector<char>> snapshot_dir(const fs::path& dir) {
  std::map<std::string, std::vector<char>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream f(entry.path(), std::ios::binary);
    files[entry.path().filename().string()] =
        std::vector<char>((std::istreambuf_iterator<char>(f)),
                          std::istreambuf_iterator<char>());
  }
  return files;
}

void criterion_reproducibility() {
  const char* cli = std::getenv("TAXSIM_CLI");
  if (!cli || !fs::exists(cli)) {
    report(10, "reproducibility", false,
           "TAXSIM_CLI is not set to the CLI binary (run via ctest)");
    return;
  }

  const fs::path root = fs::temp_directory_path() / "taxsim_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  // short grasp so the repeated full ablation runs stay quick
  const fs::path cfg_path = root / "config.json";
  {
    std::ofstream f(cfg_path);
    f << "{\"grasp\": {\"duration\": 1.0}, \"scan\": {\"pressed\": [[5, 20]]}}\n";
  }

  const std::vector<std::string> commands = {
      "framerate",
      "crosstalk --mode mitigated",
      "latency --trials 200",
      "scan --frames 3",
      "grasp",
  };

  // identical invocation twice; every produced file must regenerate
  // byte-for-byte
  bool ok = true;
  std::size_t files_checked = 0;
  for (const std::string& command : commands) {
    const fs::path dir = root / "out";
    const std::string args = "--config " + cfg_path.string() +
                             " --seed 31415 --out " + dir.string() + " " +
                             command;
    fs::remove_all(dir);
    if (run_cli(cli, args) != 0) {
      ok = false;
      break;
    }
    const auto first = snapshot_dir(dir);
    if (run_cli(cli, args) != 0) {
      ok = false;
      break;
    }
    const auto second = snapshot_dir(dir);
    ok = ok && !first.empty() && first == second;
    files_checked += first.size();
  }

  report(10, "reproducibility", ok,
         fmt("%zu output files byte-identical across repeated seeded runs",
             files_checked));
  fs::remove_all(root);
}

}  // namespace

int main() {
  criterion_timing();
  criterion_framerate_curve();
  criterion_crosstalk();
  criterion_solver_oracle();
  criterion_codec();
  criterion_hampel();
  criterion_throughput();
  criterion_latency();
  criterion_grasp();
  criterion_reproducibility();

  if (g_failures == 0)
    std::printf("all acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures;
}
