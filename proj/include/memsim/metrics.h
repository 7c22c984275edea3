#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "memsim/command_log.h"
#include "memsim/dram_spec.h"
#include "memsim/request.h"

namespace memsim {

// Half-open [begin, end) in DRAM clock cycles.
struct CycleInterval {
  int64_t begin = 0;
  int64_t end = 0;
};

// How long each command keeps its bank busy. Shared definition for the
// live tracker; the brute-force recomputation in the tests restates it.
ps_t command_occupancy_ps(CommandKind kind, const TimingSet& t);

// Accumulates per-bank busy intervals incrementally as commands issue and
// folds them into bank parallelism: mean number of busy banks over the
// cycles in which at least one bank is busy.
class BankActivityTracker {
 public:
  BankActivityTracker(const DramTypeSpec& spec, InterleaveMode mode);

  void on_command(const CommandRecord& cmd);
  void reset();

  int64_t busy_bank_cycles() const;       // numerator
  int64_t active_cycles() const;          // denominator (union over banks)
  double bpu() const;
  std::vector<double> bpu_per_channel() const;
  // Fraction of [0, duration) during which any bank of the rank is busy.
  double rank_busy_fraction(int rank, ps_t duration_ps) const;
  ps_t clock_ps() const { return clock_ps_; }

 private:
  std::vector<CycleInterval> merged(const std::vector<int>& banks) const;

  DramTypeSpec spec_;
  TimingSet timing_;
  ps_t clock_ps_;
  std::vector<std::vector<CycleInterval>> per_bank_;
  std::vector<int> bank_channel_;  // bus domain of each global bank
  std::vector<int> bank_rank_;
};

struct LocalityBreakdown {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t conflicts = 0;

  uint64_t total() const { return hits + misses + conflicts; }
  double hit_fraction() const { return total() ? (double)hits / total() : 0.0; }
  double miss_fraction() const { return total() ? (double)misses / total() : 0.0; }
  double conflict_fraction() const {
    return total() ? (double)conflicts / total() : 0.0;
  }
};

// Request-side accumulation: locality classes, latency decomposition, bytes.
class RequestStats {
 public:
  void on_complete(const MemoryRequest& r);
  void reset();

  const LocalityBreakdown& breakdown() const { return breakdown_; }
  uint64_t requests() const { return requests_; }
  uint64_t reads() const { return reads_; }
  uint64_t bytes() const { return bytes_; }
  ps_t queuing_sum() const { return queuing_sum_; }
  ps_t service_sum() const { return service_sum_; }
  double queuing_fraction() const;
  double mean_queuing_ns() const;
  double mean_service_ns() const;
  ps_t first_arrival() const { return first_arrival_; }
  ps_t last_completion() const { return last_completion_; }

 private:
  LocalityBreakdown breakdown_;
  uint64_t requests_ = 0;
  uint64_t reads_ = 0;
  uint64_t bytes_ = 0;
  ps_t queuing_sum_ = 0;
  ps_t service_sum_ = 0;
  ps_t first_arrival_ = kNeverPs;
  ps_t last_completion_ = 0;
};

double mpki(uint64_t misses, uint64_t instructions);
double ipc_value(uint64_t instructions, uint64_t cycles);

// Sum over programs of shared-run IPC divided by alone-run IPC.
double weighted_speedup(const std::vector<double>& ipc_shared,
                        const std::vector<double>& ipc_alone);

double parallel_speedup(double t1_seconds, double tn_seconds);

double sustained_bandwidth_gbps(uint64_t bytes, ps_t elapsed_ps);

// Offline replay: the same metrics recomputed from a saved event log.
struct ReplayedMetrics {
  LocalityBreakdown breakdown;
  double queuing_fraction = 0.0;
  double bpu = 0.0;
  int64_t busy_bank_cycles = 0;
  int64_t active_cycles = 0;
  uint64_t requests = 0;
  std::map<int, double> mpki_per_core;
};

void write_event_log(std::ostream& out, const std::vector<CommandRecord>& cmds,
                     const std::vector<const MemoryRequest*>& reqs,
                     const std::map<int, uint64_t>& instructions_per_core);
ReplayedMetrics replay_event_log(std::istream& in, const DramTypeSpec& spec,
                                 InterleaveMode mode);

}  // namespace memsim
