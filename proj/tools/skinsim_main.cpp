// Copyright 2026 The skinsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skinsim/bus.hpp"
#include "skinsim/config.hpp"
#include "skinsim/error.hpp"
#include "skinsim/harness.hpp"
#include "skinsim/pipeline.hpp"
#include "skinsim/sim.hpp"
#include "skinsim/topology.hpp"
#include "skinsim/util.hpp"

namespace {

using skinsim::CountFrame;
using skinsim::Error;
using skinsim::SkinConfig;

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("SKINSIM_OUT")) return env;
  return "skinsim-out";
}

int cmd_validate(const std::string& config_path, const std::string& dump) {
  const SkinConfig config = skinsim::load_config(config_path);
  const skinsim::ValidationReport report = skinsim::validate_config(config);
  if (!dump.empty()) skinsim::save_config(config, dump);
  if (report.ok()) {
    std::cout << "config ok\n";
    return 0;
  }
  for (const skinsim::Violation& v : report.violations) {
    std::cout << v.path << ": " << v.reason << "\n";
  }
  return 1;
}

int cmd_simulate(const std::string& config_path, double duration_s,
                 const std::string& stimulus_path,
                 const std::filesystem::path& out_dir,
                 const std::string& format) {
  SkinConfig config = skinsim::load_config(config_path);
  const skinsim::ValidationReport vr = skinsim::validate_config(config);
  if (!vr.ok()) {
    throw Error(skinsim::ErrorCode::kConfigInvalid,
                vr.violations.front().path + ": " +
                    vr.violations.front().reason);
  }
  skinsim::StimulusTimeline timeline;
  if (!stimulus_path.empty()) {
    timeline = skinsim::load_timeline(stimulus_path, config);
  }
  std::filesystem::create_directories(out_dir);

  std::vector<skinsim::LogRecord> records;
  for (const skinsim::Patch& patch : config.patches) {
    skinsim::PatchSimulator sim(
        patch, config.material, config.cdc, config.sample_rate_hz,
        skinsim::Rng::derive_seed(config.rng_seed,
                                  "patch-" + std::to_string(patch.id)));
    skinsim::MtbPoller poller(sim, patch.id);
    const long n_ticks = std::lround(duration_s * config.sample_rate_hz);
    std::size_t next_event = 0;
    for (long i = 0; i < n_ticks; ++i) {
      const double t_now = static_cast<double>(i) / config.sample_rate_hz;
      while (next_event < timeline.events.size() &&
             timeline.events[next_event].t_s <= t_now + 1e-12) {
        const skinsim::TimelineEvent& ev = timeline.events[next_event];
        using Kind = skinsim::TimelineEvent::Kind;
        if (ev.kind == Kind::kContact) {
          sim.set_contact(ev.contact_id, ev.contact);
        } else if (ev.kind == Kind::kClearContact) {
          sim.clear_contact(ev.contact_id);
        } else {
          sim.set_ambient_c(ev.temperature_c);
        }
        ++next_event;
      }
      const skinsim::FrameSet set = poller.next();
      const std::uint64_t t_ns = static_cast<std::uint64_t>(
          std::llround(set.tick * 1e9 / config.sample_rate_hz));
      for (const skinsim::CanFrame& f : set.frames) {
        records.push_back({t_ns, f});
      }
    }
  }

  if (format == "log" || format == "both") {
    std::ofstream log(out_dir / "skin.log", std::ios::binary);
    skinsim::write_log(log, records);
    std::cout << "wrote " << (out_dir / "skin.log").string() << " ("
              << records.size() << " frames)\n";
  }
  if (format == "csv" || format == "both") {
    std::ofstream csv(out_dir / "skin.csv", std::ios::binary);
    skinsim::log_to_csv(records, csv);
    std::cout << "wrote " << (out_dir / "skin.csv").string() << "\n";
  }
  return 0;
}

// rebuilds canonical-order frames from a thermal-sweep raw CSV
std::vector<CountFrame> frames_from_recording(
    const std::filesystem::path& path, const skinsim::Patch& patch,
    bool ramp_only) {
  std::ifstream in(path);
  if (!in) {
    throw Error(skinsim::ErrorCode::kIoError,
                "cannot read recording " + path.string());
  }
  const std::vector<skinsim::TaxelRef> order =
      skinsim::canonical_taxel_order(patch);
  std::map<std::pair<int, int>, int> idx;
  for (std::size_t i = 0; i < order.size(); ++i) {
    idx[{order[i].triangle_id, order[i].channel}] = static_cast<int>(i);
  }
  std::vector<CountFrame> frames;
  std::string line;
  bool header = true;
  std::string cur_tick;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = skinsim::split_csv_line(line);
    if (f.size() != 7) {
      throw Error(skinsim::ErrorCode::kIoError,
                  "recording rows need 7 columns "
                  "(tick,t_s,temperature_c,segment,triangle,channel,counts)");
    }
    if (ramp_only && f[3] != "ramp") continue;
    if (std::string(f[0]) != cur_tick) {
      frames.emplace_back(order.size(), 0.0);
      cur_tick = std::string(f[0]);
    }
    const auto it = idx.find({std::stoi(std::string(f[4])),
                              std::stoi(std::string(f[5]))});
    if (it == idx.end()) {
      throw Error(skinsim::ErrorCode::kIoError,
                  "recording names a taxel outside the config");
    }
    frames.back()[it->second] = skinsim::parse_double(f[6]);
  }
  return frames;
}

int cmd_calibrate(const std::string& config_path,
                  const std::string& recording_path,
                  const std::filesystem::path& out_dir) {
  const SkinConfig config = skinsim::load_config(config_path);
  const skinsim::Patch& patch = config.patches.front();
  const std::vector<CountFrame> frames =
      frames_from_recording(recording_path, patch, /*ramp_only=*/true);
  if (frames.empty()) {
    throw Error(skinsim::ErrorCode::kEmptyStream,
                "recording has no ramp frames");
  }
  const skinsim::CalibrationTable table =
      skinsim::calibrate_gains(frames, patch);
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "gains.txt", std::ios::binary);
    table.save(out);
  }
  for (const skinsim::CalibrationEntry& e : table.entries) {
    std::cout << "triangle " << e.triangle_id << " channel " << e.channel
              << "  K=" << skinsim::format_double(e.gain)
              << "  residual_rms=" <<
        skinsim::format_double(e.residual_rms_counts) << "\n";
  }
  std::cout << "wrote " << (out_dir / "gains.txt").string() << "\n";
  return 0;
}

int cmd_characterize(const std::string& config_path,
                     const std::string& experiments_arg,
                     const std::filesystem::path& out_dir) {
  const SkinConfig config = skinsim::load_config(config_path);
  std::vector<std::string> selection;
  if (experiments_arg.empty() || experiments_arg == "all") {
    selection = skinsim::all_experiments();
  } else {
    for (std::string_view name : skinsim::split_csv_line(experiments_arg)) {
      selection.emplace_back(name);
    }
  }
  for (const std::string& name : selection) {
    const auto& known = skinsim::all_experiments();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      std::cerr << "unknown experiment: " << name << "\n";
      return 2;
    }
  }
  const auto reports = skinsim::run_battery(config, selection, out_dir);
  bool all = true;
  for (const skinsim::ExperimentReport& r : reports) {
    const bool ok = r.passed && r.audit_passed;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << r.kind
              << (r.audit_passed ? "" : " (self-audit failed)") << "\n";
    all = all && ok;
  }
  return all ? 0 : 1;
}

int cmd_decode(const std::string& log_path, const std::string& out_path) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) {
    throw Error(skinsim::ErrorCode::kIoError, "cannot read " + log_path);
  }
  const std::vector<skinsim::LogRecord> records = skinsim::read_log(in);
  if (out_path.empty() || out_path == "-") {
    skinsim::log_to_csv(records, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    skinsim::log_to_csv(records, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digital twin of a modular capacitive robot-skin system"};
  app.require_subcommand(1);

  std::string config_path = "flat-prototype";
  std::filesystem::path out_dir = default_out_dir();
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "config file path or preset name");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config rng seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  auto* validate = app.add_subcommand("validate", "check a config");
  std::string dump_path;
  add_common(validate);
  validate->add_option("--dump", dump_path,
                       "write the resolved config to this path");

  auto* simulate = app.add_subcommand("simulate", "run the bus emulation");
  double duration_s = 1.0;
  std::string stimulus_path;
  std::string format = "both";
  add_common(simulate);
  simulate->add_option("--duration", duration_s, "simulated seconds");
  simulate->add_option("--stimulus", stimulus_path,
                       "stimulus timeline JSON file");
  simulate->add_option("--format", format, "csv, log or both")
      ->check(CLI::IsMember({"csv", "log", "both"}));

  auto* calibrate = app.add_subcommand("calibrate",
                                       "fit thermal gains from a recording");
  std::string recording_path;
  add_common(calibrate);
  calibrate->add_option("--recording", recording_path,
                        "thermal sweep raw CSV")
      ->required();

  auto* characterize =
      app.add_subcommand("characterize", "run characterization experiments");
  std::string experiments = "all";
  add_common(characterize);
  characterize->add_option(
      "--experiments", experiments,
      "comma-separated subset of: indentation,hysteresis,relaxation,"
      "spatial,thermal");

  auto* decode = app.add_subcommand("decode", "binary frame log to CSV");
  std::string log_path;
  std::string decode_out;
  decode->add_option("--log", log_path, "binary log path")->required();
  decode->add_option("--out", decode_out, "CSV path, - for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    auto apply_seed = [&](SkinConfig& c) {
      if (seed_set) c.rng_seed = seed;
    };
    if (validate->parsed()) return cmd_validate(config_path, dump_path);
    if (simulate->parsed()) {
      SkinConfig c = skinsim::load_config(config_path);
      apply_seed(c);
      // round-trip through the canonical form so --seed lands in the run
      const std::filesystem::path tmp = out_dir / "resolved_config.json";
      std::filesystem::create_directories(out_dir);
      skinsim::save_config(c, tmp);
      return cmd_simulate(tmp.string(), duration_s, stimulus_path, out_dir,
                          format);
    }
    if (calibrate->parsed()) {
      return cmd_calibrate(config_path, recording_path, out_dir);
    }
    if (characterize->parsed()) {
      SkinConfig c = skinsim::load_config(config_path);
      apply_seed(c);
      const std::filesystem::path tmp = out_dir / "resolved_config.json";
      std::filesystem::create_directories(out_dir);
      skinsim::save_config(c, tmp);
      return cmd_characterize(tmp.string(), experiments, out_dir);
    }
    if (decode->parsed()) return cmd_decode(log_path, decode_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == skinsim::ErrorCode::kConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
