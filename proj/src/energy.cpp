#include "memsim/energy.h"

#include <fstream>
#include <map>
#include <sstream>

namespace memsim {

namespace {

// Ordered low to high: the two mobile parts, then the commodity parts, then
// the graphics part. Types without public power figures get no entry.
const std::map<std::string, EnergyParams>& builtin_params() {
  static const std::map<std::string, EnergyParams> table = {
      {"LPDDR4", {0.8, 0.4, 1.0, 1.1, 20.0, 35.0, 0.0}},
      {"LPDDR3", {1.0, 0.5, 1.3, 1.4, 35.0, 55.0, 0.0}},
      {"DDR3", {1.8, 0.9, 2.2, 2.4, 100.0, 140.0, 0.0}},
      {"DDR4", {2.0, 1.0, 2.6, 2.8, 115.0, 160.0, 0.0}},
      {"GDDR5", {3.2, 1.6, 4.2, 4.5, 245.0, 330.0, 0.0}},
  };
  return table;
}

}  // namespace

std::optional<EnergyParams> builtin_energy_params(const std::string& dram_name) {
  auto it = builtin_params().find(dram_name);
  if (it == builtin_params().end()) return std::nullopt;
  return it->second;
}

EnergyParams load_energy_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open energy parameter file '" + path + "'");
  EnergyParams p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (size_t hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    std::istringstream ss(line);
    std::string key, eq;
    double val;
    if (!(ss >> key)) continue;
    if (!(ss >> eq >> val) || eq != "=")
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    if (key == "activate_nj") p.activate_nj = val;
    else if (key == "precharge_nj") p.precharge_nj = val;
    else if (key == "read_nj") p.read_nj = val;
    else if (key == "write_nj") p.write_nj = val;
    else if (key == "idle_standby_mw_per_rank") p.idle_standby_mw_per_rank = val;
    else if (key == "active_standby_mw_per_rank") p.active_standby_mw_per_rank = val;
    else if (key == "refresh_mw_per_rank") p.refresh_mw_per_rank = val;
    else throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (p.activate_nj < 0 || p.precharge_nj < 0 || p.read_nj < 0 || p.write_nj < 0 ||
      p.idle_standby_mw_per_rank < 0 || p.active_standby_mw_per_rank < 0 ||
      p.refresh_mw_per_rank < 0)
    throw ConfigError(path + ": energy parameters must be non-negative");
  return p;
}

void EnergyCounts::on_command(CommandKind kind) {
  switch (kind) {
    case CommandKind::activate: ++activates; break;
    case CommandKind::precharge: ++precharges; break;
    case CommandKind::read: ++reads; break;
    case CommandKind::write: ++writes; break;
  }
}

EnergyReport energy_report(const EnergyCounts& counts, ps_t duration_ps,
                           const std::vector<double>& rank_busy_fractions,
                           const EnergyParams& params) {
  if (duration_ps < 0) throw ConfigError("energy over a negative duration");
  EnergyReport r;
  r.activate_precharge_j = (counts.activates * params.activate_nj +
                            counts.precharges * params.precharge_nj) * 1e-9;
  r.read_write_j =
      (counts.reads * params.read_nj + counts.writes * params.write_nj) * 1e-9;
  double seconds = (double)duration_ps * 1e-12;
  for (double busy : rank_busy_fractions) {
    double mw = params.idle_standby_mw_per_rank * (1.0 - busy) +
                params.active_standby_mw_per_rank * busy;
    r.standby_j += mw * 1e-3 * seconds;
    r.refresh_j += params.refresh_mw_per_rank * 1e-3 * seconds;
  }
  return r;
}

EnergyRatios normalized_energy(const EnergyReport& r, const EnergyReport& baseline) {
  auto ratio = [](double a, double b) {
    if (b <= 0.0) throw ConfigError("energy normalization against a zero baseline");
    return a / b;
  };
  EnergyRatios out;
  out.activate_precharge = ratio(r.activate_precharge_j, baseline.activate_precharge_j);
  out.read_write = ratio(r.read_write_j, baseline.read_write_j);
  out.standby = ratio(r.standby_j, baseline.standby_j);
  out.total = ratio(r.total_j(), baseline.total_j());
  return out;
}

}  // namespace memsim
