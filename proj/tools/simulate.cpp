#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "memsim/metrics.h"
#include "memsim/sim.h"

namespace {

int run(const memsim::ExperimentConfig& cfg, const std::string& out_path,
        const std::string& format, const std::string& command_log_path,
        const std::string& event_log_path) {
  memsim::RunArtifacts art = memsim::run_experiment_full(cfg);

  std::string text = format == "csv" ? memsim::report_to_csv(art.report)
                                     : memsim::report_to_json(art.report);
  if (out_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw memsim::ConfigError("cannot write '" + out_path + "'");
    out << text;
  }

  if (!command_log_path.empty()) {
    std::ofstream out(command_log_path);
    if (!out)
      throw memsim::ConfigError("cannot write '" + command_log_path + "'");
    memsim::write_command_log(out, art.commands);
  }
  if (!event_log_path.empty()) {
    std::ofstream out(event_log_path);
    if (!out)
      throw memsim::ConfigError("cannot write '" + event_log_path + "'");
    std::vector<const memsim::MemoryRequest*> reqs;
    for (const auto& r : art.completed) reqs.push_back(&r);
    memsim::write_event_log(out, art.commands, reqs, art.instructions_per_core);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven DRAM timing and energy simulator"};

  memsim::ExperimentConfig cfg;
  std::string dram = "DDR3", dram_file, mode = "single", interleave,
              translation = "random", energy_params, out_path = "-",
              format = "json", command_log_path, event_log_path;
  double core_ghz = 0.0;

  app.add_option("--dram", dram, "DRAM type name (builtin table or spec dir)");
  app.add_option("--dram-file", dram_file, "spec override file");
  app.add_option("--mode", mode, "single | bundle | network | multithreaded");
  app.add_option("--trace", cfg.traces, "trace file, once per core");
  app.add_option("--synth", cfg.synth,
                 "synthetic pattern, e.g. kind=stream,footprint=16MiB,rpki=50");
  app.add_option("--interleave", interleave,
                 "cacheline | hmc_default | hmc_alt (defaults by device)");
  app.add_option("--warmup", cfg.warmup_instructions,
                 "instructions before statistics start");
  app.add_option("--max-instructions", cfg.max_instructions,
                 "dispatch cap per core (0 = whole trace)");
  app.add_option("--max-requests", cfg.max_requests,
                 "network mode packet cap (0 = whole source)");
  app.add_option("--max-inflight", cfg.max_inflight,
                 "network mode in-flight packet limit");
  app.add_option("--packet-lines", cfg.packet_lines,
                 "cache lines per injected network packet");
  app.add_option("--seed", cfg.seed, "seed for translation and synthesis");
  app.add_option("--core-ghz", core_ghz, "core clock (default 4.0, mt 2.2)");
  app.add_option("--translation", translation, "random | identity");
  app.add_option("--energy-params", energy_params,
                 "energy parameter file (default: builtin per type)");
  app.add_option("--out", out_path, "report path, - for stdout");
  app.add_option("--format", format, "json | csv");
  app.add_option("--command-log", command_log_path, "write the DRAM command log");
  app.add_option("--event-log", event_log_path, "write the replayable event log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.dram = dram;
    if (!dram_file.empty()) cfg.dram_file = dram_file;
    cfg.mode = memsim::parse_run_mode(mode);
    if (!interleave.empty()) cfg.interleave = memsim::parse_interleave(interleave);
    cfg.translation = memsim::parse_translation_mode(translation);
    if (core_ghz != 0.0) cfg.core_ghz = core_ghz;
    cfg.energy_params_file = energy_params;
    if (format != "json" && format != "csv")
      throw memsim::ConfigError("format must be json or csv");
    cfg.capture_commands =
        !command_log_path.empty() || !event_log_path.empty();
    cfg.capture_requests = !event_log_path.empty();
    return run(cfg, out_path, format, command_log_path, event_log_path);
  } catch (const memsim::TraceError& e) {
    std::cerr << "trace error: " << e.what() << "\n";
    return 3;
  } catch (const memsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
