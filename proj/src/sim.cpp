#include "memsim/sim.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace memsim {

RunMode parse_run_mode(const std::string& s) {
  if (s == "single") return RunMode::single;
  if (s == "bundle") return RunMode::bundle;
  if (s == "network") return RunMode::network;
  if (s == "multithreaded") return RunMode::multithreaded;
  throw ConfigError("unknown mode '" + s + "'");
}

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::single: return "single";
    case RunMode::bundle: return "bundle";
    case RunMode::network: return "network";
    case RunMode::multithreaded: return "multithreaded";
  }
  return "?";
}

double ExperimentConfig::resolved_core_ghz() const {
  if (core_ghz) return *core_ghz;
  return mode == RunMode::multithreaded ? 2.2 : 4.0;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  s << "dram=" << dram << ";dram_file=" << dram_file.value_or("")
    << ";interleave=" << (interleave ? to_string(*interleave) : "auto")
    << ";mode=" << to_string(mode) << ";traces=";
  for (const auto& t : traces) s << t << ",";
  s << ";synth=";
  for (const auto& t : synth) s << t << ",";
  s << ";warmup=" << warmup_instructions << ";max_instr=" << max_instructions
    << ";max_req=" << max_requests << ";inflight=" << max_inflight
    << ";packet_lines=" << packet_lines << ";seed=" << seed
    << ";ghz=" << resolved_core_ghz() << ";translation=" << to_string(translation)
    << ";window=" << core.window_size << ";width=" << core.width
    << ";l1=" << core.l1.size_bytes << "/" << core.l1.ways << "/"
    << core.l1.latency_cycles << ";l2=" << core.l2.size_bytes << "/"
    << core.l2.ways << "/" << core.l2.latency_cycles << ";l3="
    << l3_bytes_per_core << "/" << l3_ways << "/" << core.l3_latency
    << ";mt_cores=" << mt_machine_cores << ";energy=" << energy_params_file;
  return s.str();
}

namespace {

class ConcatTraceSource : public TraceSource {
 public:
  explicit ConcatTraceSource(std::vector<TraceSource*> parts)
      : parts_(std::move(parts)) {}
  std::optional<TraceRecord> next() override {
    while (idx_ < parts_.size()) {
      if (auto r = parts_[idx_]->next()) return r;
      ++idx_;
    }
    return std::nullopt;
  }
  void rewind() override {
    for (auto* p : parts_) p->rewind();
    idx_ = 0;
  }

 private:
  std::vector<TraceSource*> parts_;
  size_t idx_ = 0;
};

struct LiveReq {
  std::unique_ptr<MemoryRequest> r;
  bool counted = true;
};

struct EngineOut {
  std::vector<CoreReport> cores;
  std::map<int, uint64_t> instr_per_core;
  RequestStats stats;
  double bpu = 0.0;
  std::vector<double> bpu_per_channel;
  int64_t busy_bank_cycles = 0;
  int64_t active_cycles = 0;
  EnergyCounts counts;
  std::vector<double> rank_busy;
  ps_t stats_start_ps = 0;
  ps_t end_ps = 0;
  ps_t finish_makespan_ps = 0;
  std::vector<CommandRecord> commands;
  std::vector<MemoryRequest> completed;
};

void require_nonempty(TraceSource* src, int index) {
  src->rewind();
  if (!src->next())
    throw TraceError("trace " + std::to_string(index) + " carries no records");
  src->rewind();
}

// Shared plumbing: the memory system plus the trackers fed off its command
// stream and completion stream.
struct MemoryRig {
  std::unique_ptr<MemorySystem> mem;
  BankActivityTracker tracker;
  EnergyCounts counts;
  std::vector<CommandRecord> commands;
  bool capture_commands = false;

  MemoryRig(const DramTypeSpec& spec, InterleaveMode il, bool cap_cmds)
      : mem(make_memory_system(spec, il)), tracker(spec, il),
        capture_commands(cap_cmds) {
    mem->set_sink([this](const CommandRecord& c) {
      tracker.on_command(c);
      counts.on_command(c.kind);
      if (capture_commands) commands.push_back(c);
    });
  }
};

void finalize_memory_metrics(const DramTypeSpec& spec, MemoryRig& rig,
                             ps_t stats_start_ps, ps_t end_ps, EngineOut& out) {
  out.bpu = rig.tracker.bpu();
  out.bpu_per_channel = rig.tracker.bpu_per_channel();
  out.busy_bank_cycles = rig.tracker.busy_bank_cycles();
  out.active_cycles = rig.tracker.active_cycles();
  out.counts = rig.counts;
  out.commands = std::move(rig.commands);
  out.stats_start_ps = stats_start_ps;
  out.end_ps = end_ps;
  ps_t duration = end_ps - stats_start_ps;
  int ranks = total_rank_count(spec);
  for (int r = 0; r < ranks; ++r)
    out.rank_busy.push_back(
        duration > 0 ? rig.tracker.rank_busy_fraction(r, duration) : 0.0);
}

class CoreEngine {
 public:
  CoreEngine(const DramTypeSpec& spec, InterleaveMode il, ps_t period_ps,
             const CoreParams& base, uint64_t l3_bytes, int l3_ways,
             std::vector<TraceSource*> sources, bool shared_space, bool restart,
             uint64_t warmup, uint64_t cap, uint64_t seed, TranslationMode tmode,
             bool cap_cmds, bool cap_reqs)
      : spec_(spec),
        period_(period_ps),
        rig_(spec, il, cap_cmds),
        capture_requests_(cap_reqs),
        l3_(CacheGeometry{l3_bytes, l3_ways, 64, base.l3_latency}),
        pt_(tmode, seed, 4096, spec.capacity_bytes) {
    int n = (int)sources.size();
    for (int i = 0; i < n; ++i) {
      require_nonempty(sources[i], i);
      cores_.push_back(std::make_unique<CpuCore>(
          i, base, sources[i], &pt_, shared_space ? 0 : i, &l3_, warmup, cap,
          restart));
    }
  }

  EngineOut run() {
    EngineOut out;
    std::unordered_map<uint64_t, LiveReq> live;
    std::vector<MemoryRequest*> done;
    std::vector<ps_t> finish_ps(cores_.size(), -1);
    uint64_t next_id = 1;
    bool stats_started = false;
    ps_t stats_start_ps = 0;
    // Shadow whole-run accumulation so a run that ends inside warmup can
    // fall back to whole-run numbers, matching the cores.
    RequestStats whole_run;
    bool halted = false;
    int64_t cycle = 0;
    uint64_t last_activity_sum = 0;
    int64_t last_activity_cycle = 0;

    if (std::all_of(cores_.begin(), cores_.end(),
                    [](const auto& c) { return c->stats_active(); }))
      stats_started = true;

    uint64_t completed_total = 0;
    for (;;) {
      ps_t now = cycle * period_;
      rig_.mem->advance(now);
      done.clear();
      rig_.mem->collect_completed(now, done);
      for (MemoryRequest* p : done) {
        auto it = live.find(p->id);
        assert(it != live.end());
        if (it->second.counted) out.stats.on_complete(*p);
        whole_run.on_complete(*p);
        if (capture_requests_) out.completed.push_back(*p);
        if (!p->is_write) cores_[p->core]->on_fill(p->paddr, cycle);
        live.erase(it);
        ++completed_total;
      }

      for (auto& c : cores_) {
        while (!c->outbox.empty()) {
          CoreMemOp& op = c->outbox.front();
          ps_t ready_ps = op.ready_cycle * period_;
          if (ready_ps > now) break;
          if (!op.staged) {
            op.staged = std::make_unique<MemoryRequest>();
            op.staged->id = next_id++;
            op.staged->core = c->id();
            op.staged->is_write = op.is_write;
            op.staged->paddr = op.line_paddr;
            op.staged->arrival_ps = ready_ps;
          }
          if (!rig_.mem->try_enqueue(op.staged.get(), now)) break;
          uint64_t id = op.staged->id;
          live.emplace(id, LiveReq{std::move(op.staged), op.count_stats});
          c->outbox.pop_front();
        }
      }

      if (!stats_started &&
          std::all_of(cores_.begin(), cores_.end(),
                      [](const auto& c) { return c->stats_active(); })) {
        stats_started = true;
        stats_start_ps = now;
        rig_.tracker.reset();
        rig_.counts.reset();
      }

      if (!halted) {
        for (auto& c : cores_) c->tick(cycle);
        bool all_done = true;
        for (size_t i = 0; i < cores_.size(); ++i) {
          if (cores_[i]->finished_once()) {
            if (finish_ps[i] < 0)
              finish_ps[i] = cores_[i]->finish_cycle() * period_;
          } else {
            all_done = false;
          }
        }
        halted = all_done;
      }

      if (halted) {
        bool pending = !live.empty();
        for (auto& c : cores_)
          if (!c->outbox.empty()) pending = true;
        if (!pending && rig_.mem->drained()) {
          out.end_ps = now;
          break;
        }
      }

      uint64_t activity = completed_total;
      for (auto& c : cores_) activity += c->retired();
      if (activity != last_activity_sum) {
        last_activity_sum = activity;
        last_activity_cycle = cycle;
      } else if (cycle - last_activity_cycle > 80'000'000) {
        throw std::runtime_error("simulation made no progress; wedged");
      }
      ++cycle;
    }

    if (!stats_started) out.stats = whole_run;

    for (size_t i = 0; i < cores_.size(); ++i) {
      auto& c = *cores_[i];
      out.cores.push_back(CoreReport{(int)i, c.ipc(), c.mpki_value(),
                                     c.measured_instructions(),
                                     c.measured_cycles(), c.measured_misses()});
      out.instr_per_core[(int)i] = c.measured_instructions();
      out.finish_makespan_ps = std::max(out.finish_makespan_ps, finish_ps[i]);
    }
    finalize_memory_metrics(spec_, rig_, stats_start_ps, out.end_ps, out);
    return out;
  }

 private:
  DramTypeSpec spec_;
  ps_t period_;
  MemoryRig rig_;
  bool capture_requests_;
  CacheLevel l3_;
  PageTable pt_;
  std::vector<std::unique_ptr<CpuCore>> cores_;
};

// In-flight-limited injection straight into the controller: no cores, no
// caches, bubbles carry no time. Packets span consecutive lines.
class NetworkEngine {
 public:
  NetworkEngine(const DramTypeSpec& spec, InterleaveMode il, TraceSource* src,
                int max_inflight, int packet_lines, uint64_t max_packets,
                bool cap_cmds, bool cap_reqs)
      : spec_(spec),
        rig_(spec, il, cap_cmds),
        src_(src),
        max_inflight_(max_inflight),
        packet_lines_(packet_lines),
        max_packets_(max_packets),
        capture_requests_(cap_reqs) {
    if (max_inflight_ <= 0) throw ConfigError("max_inflight must be positive");
    if (packet_lines_ <= 0) throw ConfigError("packet_lines must be positive");
    require_nonempty(src_, 0);
    step_ = controller_config(spec, 0).timing.clock_ps;
  }

  EngineOut run() {
    EngineOut out;
    std::unordered_map<uint64_t, LiveReq> live;
    std::unordered_map<uint64_t, int> packet_left;  // request id -> packet
    std::unordered_map<uint64_t, uint64_t> req_packet;
    std::deque<std::unique_ptr<MemoryRequest>> staged;
    std::vector<MemoryRequest*> done;
    uint64_t next_id = 1;
    uint64_t next_packet = 0;
    int outstanding = 0;
    ps_t now = 0;
    int64_t idle_steps = 0;

    for (;;) {
      rig_.mem->advance(now);
      done.clear();
      rig_.mem->collect_completed(now, done);
      for (MemoryRequest* p : done) {
        out.stats.on_complete(*p);
        if (capture_requests_) out.completed.push_back(*p);
        uint64_t pk = req_packet.at(p->id);
        req_packet.erase(p->id);
        if (--packet_left.at(pk) == 0) {
          packet_left.erase(pk);
          --outstanding;
        }
        live.erase(p->id);
        idle_steps = 0;
      }

      while (!staged.empty()) {
        MemoryRequest* r = staged.front().get();
        if (!rig_.mem->try_enqueue(r, now)) break;
        live.emplace(r->id, LiveReq{std::move(staged.front()), true});
        staged.pop_front();
        idle_steps = 0;
      }

      while (outstanding < max_inflight_ && !exhausted_) {
        auto pkt = next_packet_from_source();
        if (!pkt) break;
        uint64_t pk = next_packet++;
        packet_left[pk] = packet_lines_;
        ++outstanding;
        for (int i = 0; i < packet_lines_; ++i) {
          auto r = std::make_unique<MemoryRequest>();
          r->id = next_id++;
          r->core = 0;
          r->is_write = pkt->first;
          r->paddr =
              ((pkt->second & ~63ull) + 64ull * (uint64_t)i) %
              spec_.capacity_bytes;
          r->arrival_ps = now;
          req_packet[r->id] = pk;
          staged.push_back(std::move(r));
        }
        idle_steps = 0;
      }

      if (exhausted_ && outstanding == 0 && staged.empty() &&
          rig_.mem->drained()) {
        out.end_ps = now;
        break;
      }
      if (++idle_steps > 80'000'000)
        throw std::runtime_error("injection made no progress; wedged");
      now += step_;
    }

    out.finish_makespan_ps = out.end_ps;
    finalize_memory_metrics(spec_, rig_, 0, out.end_ps, out);
    return out;
  }

 private:
  // Packets come from the records' addresses; a record with both a read and
  // a write yields two packets, read first.
  std::optional<std::pair<bool, uint64_t>> next_packet_from_source() {
    for (;;) {
      if (max_packets_ && packets_emitted_ >= max_packets_) {
        exhausted_ = true;
        return std::nullopt;
      }
      if (carried_write_) {
        carried_write_ = false;
        ++packets_emitted_;
        return std::make_pair(true, carried_addr_);
      }
      auto rec = src_->next();
      if (!rec) {
        exhausted_ = true;
        return std::nullopt;
      }
      if (rec->read_addr) {
        if (rec->write_addr) {
          carried_write_ = true;
          carried_addr_ = *rec->write_addr;
        }
        ++packets_emitted_;
        return std::make_pair(false, *rec->read_addr);
      }
      if (rec->write_addr) {
        ++packets_emitted_;
        return std::make_pair(true, *rec->write_addr);
      }
    }
  }

  DramTypeSpec spec_;
  MemoryRig rig_;
  TraceSource* src_;
  int max_inflight_;
  int packet_lines_;
  uint64_t max_packets_;
  bool capture_requests_;
  ps_t step_ = 1;
  bool exhausted_ = false;
  bool carried_write_ = false;
  uint64_t carried_addr_ = 0;
  uint64_t packets_emitted_ = 0;
};

InterleaveMode resolve_interleave(const DramTypeSpec& spec,
                                  const std::optional<InterleaveMode>& want) {
  InterleaveMode il = want.value_or(
      spec.stacked() ? InterleaveMode::hmc_default : InterleaveMode::cacheline);
  if (spec.stacked() && il == InterleaveMode::cacheline)
    throw ConfigError("cacheline interleave does not address a stacked part");
  if (!spec.stacked() && il != InterleaveMode::cacheline)
    throw ConfigError("vault interleave modes need a stacked part");
  return il;
}

std::vector<std::unique_ptr<TraceSource>> build_sources(
    const ExperimentConfig& cfg) {
  if (!cfg.traces.empty() && !cfg.synth.empty())
    throw ConfigError("give traces or synthetic patterns, not both");
  std::vector<std::unique_ptr<TraceSource>> out;
  for (const auto& path : cfg.traces) out.push_back(open_trace(path));
  for (const auto& text : cfg.synth) {
    SyntheticPattern pat = parse_pattern_spec(text);
    uint64_t total;
    if (cfg.mode == RunMode::network) {
      uint64_t target = cfg.max_requests ? cfg.max_requests : 100'000;
      total = (uint64_t)std::llround((double)target * 1000.0 / pat.rpki) + 1000;
    } else {
      total = cfg.max_instructions ? cfg.max_instructions
                                   : cfg.warmup_instructions + 2'000'000;
    }
    out.push_back(std::make_unique<SyntheticSource>(pat, total));
  }
  if (out.empty()) throw ConfigError("no trace or synthetic pattern given");
  return out;
}

SimReport base_report(const ExperimentConfig& cfg, const DramTypeSpec& spec,
                      InterleaveMode il, const EngineOut& eo) {
  SimReport r;
  r.version = kToolVersion;
  r.dram = spec.name;
  r.interleave = to_string(il);
  r.mode = to_string(cfg.mode);
  r.seed = cfg.seed;
  r.warmup_instructions = cfg.warmup_instructions;
  r.config_hash = to_hex(fnv1a64(cfg.canonical()));
  r.cores = eo.cores;
  r.bpu = eo.bpu;
  r.bpu_per_channel = eo.bpu_per_channel;
  r.busy_bank_cycles = eo.busy_bank_cycles;
  r.active_cycles = eo.active_cycles;
  r.locality = eo.stats.breakdown();
  r.queuing_fraction = eo.stats.queuing_fraction();
  r.mean_queuing_ns = eo.stats.mean_queuing_ns();
  r.mean_service_ns = eo.stats.mean_service_ns();
  r.requests = eo.stats.requests();
  r.read_requests = eo.stats.reads();
  r.bytes = eo.stats.bytes();
  r.duration_ps = eo.end_ps - eo.stats_start_ps;
  r.sustained_gbps =
      r.duration_ps > 0 ? sustained_bandwidth_gbps(r.bytes, r.duration_ps) : 0.0;
  r.peak_gbps = peak_bandwidth_gbps(spec);

  std::optional<EnergyParams> params;
  if (!cfg.energy_params_file.empty()) {
    params = load_energy_params(cfg.energy_params_file);
    r.energy_source = "file:" + cfg.energy_params_file;
  } else if (auto p = builtin_energy_params(spec.name)) {
    params = *p;
    r.energy_source = "builtin";
  }
  if (params && r.duration_ps > 0) {
    r.energy = energy_report(eo.counts, r.duration_ps, eo.rank_busy, *params);
  } else {
    r.energy_source.clear();
  }
  return r;
}

}  // namespace

RunArtifacts run_experiment_full(const ExperimentConfig& cfg) {
  DramTypeSpec spec = resolve_spec(cfg.dram, cfg.dram_file);
  InterleaveMode il = resolve_interleave(spec, cfg.interleave);
  auto sources = build_sources(cfg);
  std::vector<TraceSource*> raw;
  for (auto& s : sources) raw.push_back(s.get());

  double ghz = cfg.resolved_core_ghz();
  if (ghz <= 0) throw ConfigError("core frequency must be positive");
  ps_t period = (ps_t)std::llround(1000.0 / ghz);
  if (period <= 0) throw ConfigError("core frequency too high to model");

  size_t n = raw.size();
  switch (cfg.mode) {
    case RunMode::single:
      if (n != 1) throw ConfigError("single mode takes exactly one trace");
      break;
    case RunMode::bundle:
      if (n < 2) throw ConfigError("bundle mode takes at least two traces");
      break;
    case RunMode::network:
      if (n != 1) throw ConfigError("network mode takes exactly one trace");
      break;
    case RunMode::multithreaded:
      if (n < 1 || (int)n > cfg.mt_machine_cores)
        throw ConfigError("multithreaded mode takes 1.." +
                          std::to_string(cfg.mt_machine_cores) + " traces");
      break;
  }

  RunArtifacts art;
  art.spec = spec;
  art.interleave = il;

  if (cfg.mode == RunMode::network) {
    NetworkEngine eng(spec, il, raw[0], cfg.max_inflight, cfg.packet_lines,
                      cfg.max_requests, cfg.capture_commands,
                      cfg.capture_requests);
    EngineOut eo = eng.run();
    art.report = base_report(cfg, spec, il, eo);
    art.report.cores.clear();  // no cores ran
    art.commands = std::move(eo.commands);
    art.completed = std::move(eo.completed);
    return art;
  }

  if (cfg.mode == RunMode::single || cfg.mode == RunMode::bundle) {
    bool bundle = cfg.mode == RunMode::bundle;
    uint64_t l3_bytes = cfg.l3_bytes_per_core * n;
    CoreEngine eng(spec, il, period, cfg.core, l3_bytes, cfg.l3_ways, raw,
                   false, bundle, cfg.warmup_instructions, cfg.max_instructions,
                   cfg.seed, cfg.translation, cfg.capture_commands,
                   cfg.capture_requests);
    EngineOut eo = eng.run();
    art.report = base_report(cfg, spec, il, eo);
    art.commands = std::move(eo.commands);
    art.completed = std::move(eo.completed);
    art.instructions_per_core = eo.instr_per_core;

    if (bundle) {
      std::vector<double> shared, alone;
      for (const auto& c : eo.cores) shared.push_back(c.ipc);
      for (size_t i = 0; i < n; ++i) {
        CoreEngine solo(spec, il, period, cfg.core, l3_bytes, cfg.l3_ways,
                        {raw[i]}, false, false, cfg.warmup_instructions,
                        cfg.max_instructions, cfg.seed, cfg.translation, false,
                        false);
        EngineOut so = solo.run();
        alone.push_back(so.cores.at(0).ipc);
      }
      art.report.weighted_speedup = weighted_speedup(shared, alone);
    }
    return art;
  }

  // multithreaded: the parallel run, then the same work serialized on one
  // core of the same machine.
  uint64_t l3_bytes = cfg.l3_bytes_per_core * (uint64_t)cfg.mt_machine_cores;
  CoreEngine par(spec, il, period, cfg.core, l3_bytes, cfg.l3_ways, raw, true,
                 false, cfg.warmup_instructions, cfg.max_instructions, cfg.seed,
                 cfg.translation, cfg.capture_commands, cfg.capture_requests);
  EngineOut eo = par.run();
  art.report = base_report(cfg, spec, il, eo);
  art.commands = std::move(eo.commands);
  art.completed = std::move(eo.completed);
  art.instructions_per_core = eo.instr_per_core;

  ConcatTraceSource serial_src(raw);
  uint64_t serial_cap =
      cfg.max_instructions ? cfg.max_instructions * (uint64_t)n : 0;
  CoreEngine ser(spec, il, period, cfg.core, l3_bytes, cfg.l3_ways,
                 {&serial_src}, true, false, cfg.warmup_instructions, serial_cap,
                 cfg.seed, cfg.translation, false, false);
  EngineOut so = ser.run();
  double t1 = (double)so.finish_makespan_ps * 1e-12;
  double tn = (double)eo.finish_makespan_ps * 1e-12;
  art.report.parallel_speedup = parallel_speedup(t1, tn);
  return art;
}

SimReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment_full(cfg).report;
}

}  // namespace memsim
