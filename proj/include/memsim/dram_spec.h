#pragma once

#include <optional>
#include <string>
#include <vector>

#include "memsim/common.h"

namespace memsim {

// Static description of one DRAM type: geometry, rates, and the three
// measured access latencies (row hit, row miss, minimum row conflict).
struct DramTypeSpec {
  std::string name;
  int data_rate_mtps = 0;   // transfers per second, millions
  int clock_mhz = 0;        // command clock
  double max_bandwidth_gbps = 0.0;
  int channels = 0;
  int ranks_per_channel = 0;
  int banks_per_rank = 0;   // for stacked parts this counts all banks per channel
  int bank_groups = 0;      // 0 or 1 when the type has no bank grouping
  int vaults = 0;           // stacked-logic parts only, 0 otherwise
  int channel_width_bits = 0;
  int row_bytes = 0;
  ps_t hit_ps = 0;
  ps_t miss_ps = 0;
  ps_t conflict_min_ps = 0;
  uint64_t capacity_bytes = 4ull << 30;
  int queue_depth_read = 32;
  int queue_depth_write = 32;

  bool stacked() const { return vaults > 0; }
  int banks_per_vault() const { return vaults ? banks_per_rank / vaults : 0; }
  int total_banks() const { return channels * ranks_per_channel * banks_per_rank; }
  uint64_t bytes_per_rank() const {
    return capacity_bytes / (uint64_t)(channels * ranks_per_channel);
  }
  uint64_t rows_per_bank() const {
    return bytes_per_rank() / (uint64_t)banks_per_rank / (uint64_t)row_bytes;
  }
  int lines_per_row(int line_bytes = 64) const { return row_bytes / line_bytes; }

  // Throws ConfigError when the fields cannot describe a schedulable device.
  void validate() const;
};

// Per-command timing parameters, derived from the three measured latencies:
//   tCAS = hit, tRCD = miss - hit, tRP = conflict - miss.
// The *_clk fields are ceiling-rounded to whole command clocks.
struct TimingSet {
  ps_t clock_ps = 0;
  ps_t burst_ps = 0;  // one cache line on the channel data bus
  ps_t tcas_ps = 0;
  ps_t trcd_ps = 0;
  ps_t trp_ps = 0;
  ps_t tras_ps = 0;                  // defaults to tRCD + tCAS + burst
  ps_t tccd_same_group_ps = 0;       // CAS-to-CAS, same bank group
  ps_t tccd_other_group_ps = 0;      // CAS-to-CAS, different group (= burst)
  int tcas_clk = 0;
  int trcd_clk = 0;
  int trp_clk = 0;
  int tras_clk = 0;
  int burst_clk = 0;
};

TimingSet derive_timings(const DramTypeSpec& spec, int line_bytes = 64);

enum class InterleaveMode { cacheline, hmc_default, hmc_alt };

const char* to_string(InterleaveMode m);
InterleaveMode parse_interleave(const std::string& s);

struct DramCoordinates {
  int channel = 0;
  int rank = 0;
  int bank = 0;        // index within the rank (or within the vault)
  int bank_group = 0;  // bank % groups for grouped types
  int vault = 0;
  int column = 0;      // line index within the row
  int64_t row = 0;

  bool operator==(const DramCoordinates&) const = default;
};

// Physical address -> device coordinates, pure bit slicing above the 6
// line-offset bits. compose_address is the exact inverse.
DramCoordinates map_address(uint64_t paddr, const DramTypeSpec& spec,
                            InterleaveMode mode, int line_bytes = 64);
uint64_t compose_address(const DramCoordinates& c, const DramTypeSpec& spec,
                         InterleaveMode mode, int line_bytes = 64);

// Index in [0, total_banks) naming a physical bank across the whole device.
int global_bank_index(const DramCoordinates& c, const DramTypeSpec& spec);
int global_rank_index(const DramCoordinates& c, const DramTypeSpec& spec);
int total_rank_count(const DramTypeSpec& spec);

// GB/s. Product of rate, width and channel count; stacked parts report the
// serial-link bound instead.
double peak_bandwidth_gbps(const DramTypeSpec& spec);

const std::vector<std::string>& builtin_names();
const DramTypeSpec& builtin_spec(const std::string& name);

// Override files: "[NAME]" section headers followed by key = value lines.
std::vector<DramTypeSpec> load_spec_file(const std::string& path);

// Resolution order: builtin table, explicit file, then $MEMSIM_SPEC_DIR/<name>.spec.
DramTypeSpec resolve_spec(const std::string& name,
                          const std::optional<std::string>& spec_file);

}  // namespace memsim
