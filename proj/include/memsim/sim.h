#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memsim/command_log.h"
#include "memsim/controller.h"
#include "memsim/cpu.h"
#include "memsim/energy.h"
#include "memsim/metrics.h"

namespace memsim {

enum class RunMode { single, bundle, network, multithreaded };

RunMode parse_run_mode(const std::string& s);
const char* to_string(RunMode m);

struct ExperimentConfig {
  std::string dram = "DDR3";
  std::optional<std::string> dram_file;
  std::optional<InterleaveMode> interleave;  // defaulted from the device kind
  RunMode mode = RunMode::single;
  std::vector<std::string> traces;  // file paths, one per core
  std::vector<std::string> synth;   // pattern specs, exclusive with traces
  uint64_t warmup_instructions = 1'000'000;
  uint64_t max_instructions = 0;  // dispatch cap per core; 0 means whole trace
  uint64_t max_requests = 0;      // network packet cap; 0 means whole source
  int max_inflight = 50;
  int packet_lines = 1;
  uint64_t seed = 1;
  std::optional<double> core_ghz;  // default 4.0, or 2.2 for multithreaded
  TranslationMode translation = TranslationMode::random;
  CoreParams core;
  uint64_t l3_bytes_per_core = 2ull << 20;
  int l3_ways = 8;
  int mt_machine_cores = 20;
  std::string energy_params_file;

  bool capture_commands = false;
  bool capture_requests = false;

  double resolved_core_ghz() const;
  std::string canonical() const;  // stable key=value text, hashed into reports
};

struct CoreReport {
  int core = 0;
  double ipc = 0.0;
  double mpki = 0.0;
  uint64_t instructions = 0;
  uint64_t cycles = 0;
  uint64_t llc_misses = 0;
};

struct SimReport {
  std::string version;
  std::string dram;
  std::string interleave;
  std::string mode;
  uint64_t seed = 0;
  uint64_t warmup_instructions = 0;
  std::string config_hash;

  std::vector<CoreReport> cores;
  std::optional<double> weighted_speedup;
  std::optional<double> parallel_speedup;

  double bpu = 0.0;
  std::vector<double> bpu_per_channel;
  int64_t busy_bank_cycles = 0;
  int64_t active_cycles = 0;
  LocalityBreakdown locality;
  double queuing_fraction = 0.0;
  double mean_queuing_ns = 0.0;
  double mean_service_ns = 0.0;
  uint64_t requests = 0;
  uint64_t read_requests = 0;
  uint64_t bytes = 0;
  ps_t duration_ps = 0;
  double sustained_gbps = 0.0;
  double peak_gbps = 0.0;

  std::optional<EnergyReport> energy;
  std::string energy_source;
};

// Full-run outputs beyond the report, for log emission and offline checking.
struct RunArtifacts {
  SimReport report;
  DramTypeSpec spec;
  InterleaveMode interleave = InterleaveMode::cacheline;
  std::vector<CommandRecord> commands;     // when capture_commands
  std::vector<MemoryRequest> completed;    // when capture_requests
  std::map<int, uint64_t> instructions_per_core;
};

RunArtifacts run_experiment_full(const ExperimentConfig& cfg);
SimReport run_experiment(const ExperimentConfig& cfg);

// Serialization (report.cpp). JSON round-trips; CSV is one row per core
// plus exactly one aggregate row.
std::string report_to_json(const SimReport& r);
SimReport report_from_json(const std::string& text);
std::string report_to_csv(const SimReport& r);

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace memsim
