#include <json.hpp>
#include <sstream>

#include "memsim/sim.h"

namespace memsim {

using ojson = nlohmann::ordered_json;

namespace {

ojson core_json(const CoreReport& c) {
  return ojson{{"core", c.core},          {"ipc", c.ipc},
               {"mpki", c.mpki},          {"instructions", c.instructions},
               {"cycles", c.cycles},      {"llc_misses", c.llc_misses}};
}

std::string num(double v) { return ojson(v).dump(); }

}  // namespace

std::string report_to_json(const SimReport& r) {
  ojson j;
  j["meta"] = ojson{{"version", r.version},
                    {"dram", r.dram},
                    {"interleave", r.interleave},
                    {"mode", r.mode},
                    {"seed", r.seed},
                    {"warmup_instructions", r.warmup_instructions},
                    {"config_hash", r.config_hash}};
  j["cores"] = ojson::array();
  for (const auto& c : r.cores) j["cores"].push_back(core_json(c));
  if (r.weighted_speedup) j["weighted_speedup"] = *r.weighted_speedup;
  if (r.parallel_speedup) j["parallel_speedup"] = *r.parallel_speedup;
  j["memory"] = ojson{
      {"bpu", r.bpu},
      {"bpu_per_channel", r.bpu_per_channel},
      {"busy_bank_cycles", r.busy_bank_cycles},
      {"active_cycles", r.active_cycles},
      {"locality",
       ojson{{"hits", r.locality.hits},
             {"misses", r.locality.misses},
             {"conflicts", r.locality.conflicts},
             {"hit_fraction", r.locality.hit_fraction()},
             {"miss_fraction", r.locality.miss_fraction()},
             {"conflict_fraction", r.locality.conflict_fraction()}}},
      {"queuing_fraction", r.queuing_fraction},
      {"mean_queuing_ns", r.mean_queuing_ns},
      {"mean_service_ns", r.mean_service_ns},
      {"requests", r.requests},
      {"read_requests", r.read_requests},
      {"bytes", r.bytes},
      {"duration_ps", r.duration_ps},
      {"sustained_gbps", r.sustained_gbps},
      {"peak_gbps", r.peak_gbps}};
  if (r.energy) {
    j["energy"] = ojson{{"source", r.energy_source},
                        {"activate_precharge_j", r.energy->activate_precharge_j},
                        {"read_write_j", r.energy->read_write_j},
                        {"standby_j", r.energy->standby_j},
                        {"refresh_j", r.energy->refresh_j},
                        {"total_j", r.energy->total_j()}};
  }
  return j.dump(2) + "\n";
}

SimReport report_from_json(const std::string& text) {
  ojson j = ojson::parse(text);
  SimReport r;
  const auto& m = j.at("meta");
  r.version = m.at("version").get<std::string>();
  r.dram = m.at("dram").get<std::string>();
  r.interleave = m.at("interleave").get<std::string>();
  r.mode = m.at("mode").get<std::string>();
  r.seed = m.at("seed").get<uint64_t>();
  r.warmup_instructions = m.at("warmup_instructions").get<uint64_t>();
  r.config_hash = m.at("config_hash").get<std::string>();
  for (const auto& c : j.at("cores")) {
    CoreReport cr;
    cr.core = c.at("core").get<int>();
    cr.ipc = c.at("ipc").get<double>();
    cr.mpki = c.at("mpki").get<double>();
    cr.instructions = c.at("instructions").get<uint64_t>();
    cr.cycles = c.at("cycles").get<uint64_t>();
    cr.llc_misses = c.at("llc_misses").get<uint64_t>();
    r.cores.push_back(cr);
  }
  if (j.contains("weighted_speedup"))
    r.weighted_speedup = j.at("weighted_speedup").get<double>();
  if (j.contains("parallel_speedup"))
    r.parallel_speedup = j.at("parallel_speedup").get<double>();
  const auto& mem = j.at("memory");
  r.bpu = mem.at("bpu").get<double>();
  r.bpu_per_channel = mem.at("bpu_per_channel").get<std::vector<double>>();
  r.busy_bank_cycles = mem.at("busy_bank_cycles").get<int64_t>();
  r.active_cycles = mem.at("active_cycles").get<int64_t>();
  const auto& loc = mem.at("locality");
  r.locality.hits = loc.at("hits").get<uint64_t>();
  r.locality.misses = loc.at("misses").get<uint64_t>();
  r.locality.conflicts = loc.at("conflicts").get<uint64_t>();
  r.queuing_fraction = mem.at("queuing_fraction").get<double>();
  r.mean_queuing_ns = mem.at("mean_queuing_ns").get<double>();
  r.mean_service_ns = mem.at("mean_service_ns").get<double>();
  r.requests = mem.at("requests").get<uint64_t>();
  r.read_requests = mem.at("read_requests").get<uint64_t>();
  r.bytes = mem.at("bytes").get<uint64_t>();
  r.duration_ps = mem.at("duration_ps").get<int64_t>();
  r.sustained_gbps = mem.at("sustained_gbps").get<double>();
  r.peak_gbps = mem.at("peak_gbps").get<double>();
  if (j.contains("energy")) {
    EnergyReport e;
    const auto& je = j.at("energy");
    r.energy_source = je.at("source").get<std::string>();
    e.activate_precharge_j = je.at("activate_precharge_j").get<double>();
    e.read_write_j = je.at("read_write_j").get<double>();
    e.standby_j = je.at("standby_j").get<double>();
    e.refresh_j = je.at("refresh_j").get<double>();
    r.energy = e;
  }
  return r;
}

std::string report_to_csv(const SimReport& r) {
  std::ostringstream out;
  out << "row,core,ipc,mpki,instructions,cycles,llc_misses,"
         "weighted_speedup,parallel_speedup,bpu,hit_fraction,miss_fraction,"
         "conflict_fraction,queuing_fraction,sustained_gbps,peak_gbps,"
         "requests,bytes,duration_ps,energy_total_j\n";
  for (const auto& c : r.cores) {
    out << "core," << c.core << "," << num(c.ipc) << "," << num(c.mpki) << ","
        << c.instructions << "," << c.cycles << "," << c.llc_misses
        << ",,,,,,,,,,,,,\n";
  }
  out << "aggregate,,,,,,,";
  out << (r.weighted_speedup ? num(*r.weighted_speedup) : "") << ",";
  out << (r.parallel_speedup ? num(*r.parallel_speedup) : "") << ",";
  out << num(r.bpu) << "," << num(r.locality.hit_fraction()) << ","
      << num(r.locality.miss_fraction()) << ","
      << num(r.locality.conflict_fraction()) << "," << num(r.queuing_fraction)
      << "," << num(r.sustained_gbps) << "," << num(r.peak_gbps) << ","
      << r.requests << "," << r.bytes << "," << r.duration_ps << ","
      << (r.energy ? num(r.energy->total_j()) : "") << "\n";
  return out.str();
}

}  // namespace memsim
