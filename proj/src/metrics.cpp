#include "memsim/metrics.h"

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>
#include <sstream>

namespace memsim {

ps_t command_occupancy_ps(CommandKind kind, const TimingSet& t) {
  switch (kind) {
    case CommandKind::activate: return t.trcd_ps;
    case CommandKind::precharge: return t.trp_ps;
    case CommandKind::read: return t.tcas_ps + t.burst_ps;
    case CommandKind::write: return t.burst_ps;
  }
  return 0;
}

BankActivityTracker::BankActivityTracker(const DramTypeSpec& spec,
                                         InterleaveMode mode)
    : spec_(spec), timing_(derive_timings(spec)), clock_ps_(timing_.clock_ps) {
  (void)mode;
  per_bank_.resize(spec_.total_banks());
  bank_channel_.resize(spec_.total_banks());
  bank_rank_.resize(spec_.total_banks());
  int banks_per_domain = spec_.stacked()
                             ? spec_.banks_per_vault()
                             : spec_.ranks_per_channel * spec_.banks_per_rank;
  for (int g = 0; g < spec_.total_banks(); ++g) {
    bank_channel_[g] = g / banks_per_domain;
    bank_rank_[g] = spec_.stacked() ? g / spec_.banks_per_vault()
                                    : g / spec_.banks_per_rank;
  }
}

void BankActivityTracker::on_command(const CommandRecord& cmd) {
  int g = global_bank_index(cmd.coords, spec_);
  ps_t begin = cmd.issue_ps;
  ps_t end = begin + command_occupancy_ps(cmd.kind, timing_);
  CycleInterval iv{begin / clock_ps_, ceil_div(end, clock_ps_)};
  auto& list = per_bank_[g];
  // Commands to one bank arrive in time order, so appending keeps the list
  // sorted and merging only ever touches the tail.
  if (!list.empty() && iv.begin <= list.back().end) {
    list.back().end = std::max(list.back().end, iv.end);
  } else {
    list.push_back(iv);
  }
}

void BankActivityTracker::reset() {
  for (auto& l : per_bank_) l.clear();
}

int64_t BankActivityTracker::busy_bank_cycles() const {
  int64_t sum = 0;
  for (const auto& l : per_bank_)
    for (const auto& iv : l) sum += iv.end - iv.begin;
  return sum;
}

std::vector<CycleInterval> BankActivityTracker::merged(
    const std::vector<int>& banks) const {
  std::vector<CycleInterval> all;
  for (int b : banks) all.insert(all.end(), per_bank_[b].begin(), per_bank_[b].end());
  std::sort(all.begin(), all.end(), [](const CycleInterval& a, const CycleInterval& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
  });
  std::vector<CycleInterval> out;
  for (const auto& iv : all) {
    if (!out.empty() && iv.begin <= out.back().end)
      out.back().end = std::max(out.back().end, iv.end);
    else
      out.push_back(iv);
  }
  return out;
}

int64_t BankActivityTracker::active_cycles() const {
  std::vector<int> all(per_bank_.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = (int)i;
  int64_t sum = 0;
  for (const auto& iv : merged(all)) sum += iv.end - iv.begin;
  return sum;
}

double BankActivityTracker::bpu() const {
  int64_t denom = active_cycles();
  return denom ? (double)busy_bank_cycles() / (double)denom : 0.0;
}

std::vector<double> BankActivityTracker::bpu_per_channel() const {
  int domains = 1 + *std::max_element(bank_channel_.begin(), bank_channel_.end());
  std::vector<double> out;
  for (int d = 0; d < domains; ++d) {
    std::vector<int> banks;
    int64_t busy = 0;
    for (size_t g = 0; g < per_bank_.size(); ++g) {
      if (bank_channel_[g] != d) continue;
      banks.push_back((int)g);
      for (const auto& iv : per_bank_[g]) busy += iv.end - iv.begin;
    }
    int64_t active = 0;
    for (const auto& iv : merged(banks)) active += iv.end - iv.begin;
    out.push_back(active ? (double)busy / (double)active : 0.0);
  }
  return out;
}

double BankActivityTracker::rank_busy_fraction(int rank, ps_t duration_ps) const {
  if (duration_ps <= 0) return 0.0;
  std::vector<int> banks;
  for (size_t g = 0; g < per_bank_.size(); ++g)
    if (bank_rank_[g] == rank) banks.push_back((int)g);
  int64_t busy = 0;
  for (const auto& iv : merged(banks)) busy += iv.end - iv.begin;
  double frac = (double)busy * (double)clock_ps_ / (double)duration_ps;
  return std::min(frac, 1.0);
}

void RequestStats::on_complete(const MemoryRequest& r) {
  assert(r.cls != LocalityClass::unclassified);
  switch (r.cls) {
    case LocalityClass::hit: ++breakdown_.hits; break;
    case LocalityClass::miss: ++breakdown_.misses; break;
    case LocalityClass::conflict: ++breakdown_.conflicts; break;
    case LocalityClass::unclassified: break;
  }
  ++requests_;
  if (!r.is_write) ++reads_;
  bytes_ += 64;
  queuing_sum_ += r.queuing_ps();
  service_sum_ += r.service_ps();
  first_arrival_ = std::min(first_arrival_, r.arrival_ps);
  last_completion_ = std::max(last_completion_, r.completion_ps);
}

void RequestStats::reset() { *this = RequestStats{}; }

double RequestStats::queuing_fraction() const {
  ps_t total = queuing_sum_ + service_sum_;
  return total ? (double)queuing_sum_ / (double)total : 0.0;
}

double RequestStats::mean_queuing_ns() const {
  return requests_ ? (double)queuing_sum_ / 1000.0 / (double)requests_ : 0.0;
}

double RequestStats::mean_service_ns() const {
  return requests_ ? (double)service_sum_ / 1000.0 / (double)requests_ : 0.0;
}

double mpki(uint64_t misses, uint64_t instructions) {
  if (instructions == 0) throw ConfigError("mpki over zero instructions");
  return (double)misses * 1000.0 / (double)instructions;
}

double ipc_value(uint64_t instructions, uint64_t cycles) {
  if (cycles == 0) throw ConfigError("ipc over zero cycles");
  return (double)instructions / (double)cycles;
}

double weighted_speedup(const std::vector<double>& ipc_shared,
                        const std::vector<double>& ipc_alone) {
  if (ipc_shared.size() != ipc_alone.size())
    throw ConfigError("weighted speedup: shared and alone lists differ in length");
  if (ipc_shared.empty())
    throw ConfigError("weighted speedup of an empty bundle");
  double ws = 0.0;
  for (size_t i = 0; i < ipc_shared.size(); ++i) {
    if (ipc_alone[i] <= 0.0)
      throw ConfigError("weighted speedup: alone IPC must be positive");
    ws += ipc_shared[i] / ipc_alone[i];
  }
  return ws;
}

double parallel_speedup(double t1_seconds, double tn_seconds) {
  if (t1_seconds <= 0 || tn_seconds <= 0)
    throw ConfigError("parallel speedup needs positive run times");
  return t1_seconds / tn_seconds;
}

double sustained_bandwidth_gbps(uint64_t bytes, ps_t elapsed_ps) {
  if (elapsed_ps <= 0) return 0.0;
  return (double)bytes * 1000.0 / (double)elapsed_ps;
}

void write_event_log(std::ostream& out, const std::vector<CommandRecord>& cmds,
                     const std::vector<const MemoryRequest*>& reqs,
                     const std::map<int, uint64_t>& instructions_per_core) {
  for (const auto& c : cmds) {
    out << c.issue_ps << " cmd " << c.channel << ' ' << to_string(c.kind) << ' '
        << c.coords.rank << ' ' << c.coords.bank_group << ' ' << c.coords.bank
        << ' ' << c.coords.vault << ' ' << c.coords.row << ' ' << c.coords.column
        << ' ' << c.request_id << '\n';
  }
  for (const MemoryRequest* r : reqs) {
    out << r->completion_ps << " req " << r->id << ' ' << r->core << ' '
        << (r->is_write ? 'W' : 'R') << ' ' << r->arrival_ps << ' '
        << r->first_command_ps << ' ' << r->dram_complete_ps << ' '
        << to_string(r->cls) << '\n';
  }
  for (const auto& [core, instr] : instructions_per_core)
    out << "0 end " << core << ' ' << instr << '\n';
}

ReplayedMetrics replay_event_log(std::istream& in, const DramTypeSpec& spec,
                                 InterleaveMode mode) {
  BankActivityTracker tracker(spec, mode);
  ReplayedMetrics m;
  ps_t queuing = 0, service = 0;
  std::map<int, uint64_t> misses, instructions;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ps_t stamp;
    std::string kind;
    if (!(ss >> stamp >> kind))
      throw ConfigError("event log line " + std::to_string(lineno) + " malformed");
    if (kind == "cmd") {
      CommandRecord c;
      c.issue_ps = stamp;
      std::string ck;
      if (!(ss >> c.channel >> ck >> c.coords.rank >> c.coords.bank_group >>
            c.coords.bank >> c.coords.vault >> c.coords.row >>
            c.coords.column >> c.request_id))
        throw ConfigError("event log line " + std::to_string(lineno) + " malformed");
      c.coords.channel = c.channel;
      if (ck == "ACT") c.kind = CommandKind::activate;
      else if (ck == "RD") c.kind = CommandKind::read;
      else if (ck == "WR") c.kind = CommandKind::write;
      else if (ck == "PRE") c.kind = CommandKind::precharge;
      else throw ConfigError("event log line " + std::to_string(lineno) +
                             ": unknown command " + ck);
      tracker.on_command(c);
    } else if (kind == "req") {
      uint64_t id;
      int core;
      char rw;
      ps_t arrival, first, dram;
      std::string cls;
      if (!(ss >> id >> core >> rw >> arrival >> first >> dram >> cls))
        throw ConfigError("event log line " + std::to_string(lineno) + " malformed");
      ++m.requests;
      if (cls == "hit") ++m.breakdown.hits;
      else if (cls == "miss") ++m.breakdown.misses;
      else if (cls == "conflict") ++m.breakdown.conflicts;
      else throw ConfigError("event log line " + std::to_string(lineno) +
                             ": unknown class " + cls);
      queuing += first - arrival;
      service += stamp - first;
      if (rw == 'R' && core >= 0) ++misses[core];
    } else if (kind == "end") {
      int core;
      uint64_t instr;
      if (!(ss >> core >> instr))
        throw ConfigError("event log line " + std::to_string(lineno) + " malformed");
      instructions[core] = instr;
    } else {
      throw ConfigError("event log line " + std::to_string(lineno) +
                        ": unknown event " + kind);
    }
  }
  m.queuing_fraction =
      (queuing + service) ? (double)queuing / (double)(queuing + service) : 0.0;
  m.busy_bank_cycles = tracker.busy_bank_cycles();
  m.active_cycles = tracker.active_cycles();
  m.bpu = tracker.bpu();
  for (const auto& [core, instr] : instructions)
    if (instr) m.mpki_per_core[core] = mpki(misses[core], instr);
  return m;
}

}  // namespace memsim
