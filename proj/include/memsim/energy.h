#pragma once

#include <optional>
#include <string>

#include "memsim/command_log.h"
#include "memsim/common.h"

namespace memsim {

// Per-command energies and background power. The shipped numbers are
// placeholders on a consistent scale, not datasheet values; their orderings
// across types are what the model is expected to preserve.
struct EnergyParams {
  double activate_nj = 0.0;
  double precharge_nj = 0.0;
  double read_nj = 0.0;   // one line transferred
  double write_nj = 0.0;
  double idle_standby_mw_per_rank = 0.0;
  double active_standby_mw_per_rank = 0.0;
  double refresh_mw_per_rank = 0.0;  // stays 0 while refresh is off
};

std::optional<EnergyParams> builtin_energy_params(const std::string& dram_name);
EnergyParams load_energy_params(const std::string& path);

struct EnergyCounts {
  uint64_t activates = 0;
  uint64_t precharges = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;

  void on_command(CommandKind kind);
  void reset() { *this = EnergyCounts{}; }
};

struct EnergyReport {
  double activate_precharge_j = 0.0;
  double read_write_j = 0.0;
  double standby_j = 0.0;
  double refresh_j = 0.0;

  double total_j() const {
    return activate_precharge_j + read_write_j + standby_j + refresh_j;
  }
};

// rank_busy_fractions holds, per rank, the fraction of the duration with at
// least one busy bank; standby power splits between the active and idle
// levels accordingly.
EnergyReport energy_report(const EnergyCounts& counts, ps_t duration_ps,
                           const std::vector<double>& rank_busy_fractions,
                           const EnergyParams& params);

struct EnergyRatios {
  double activate_precharge = 0.0;
  double read_write = 0.0;
  double standby = 0.0;
  double total = 0.0;
};

EnergyRatios normalized_energy(const EnergyReport& r, const EnergyReport& baseline);

}  // namespace memsim
