#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "memsim/command_log.h"
#include "memsim/dram_spec.h"
#include "memsim/request.h"

namespace memsim {

using CommandSink = std::function<void(const CommandRecord&)>;

struct ControllerConfig {
  TimingSet timing;
  int ranks = 1;
  int banks_per_rank = 8;
  int groups = 1;
  int rq_depth = 32;
  int wq_depth = 32;
  int wq_drain_high = 28;
  int wq_drain_low = 16;
  int channel_id = 0;
};

// One command sequencer: FR-FCFS over its read queue, open-page row policy,
// writes held back until the drain watermark trips or the read queue idles.
// Commands issue on the shared picosecond timeline; the command bus fits one
// command per clock, the data bus one burst per burst window.
class ChannelController {
 public:
  explicit ChannelController(const ControllerConfig& cfg);

  void set_sink(CommandSink sink) { sink_ = std::move(sink); }
  bool can_accept(bool is_write, ps_t now);
  void enqueue(MemoryRequest* r, ps_t ready_ps);
  void advance(ps_t now);
  void collect_completed(ps_t now, std::vector<MemoryRequest*>& out);
  bool drained() const;
  ps_t next_event_hint() const;

  int read_occupancy() const { return (int)rq_.size(); }
  int write_occupancy() const { return (int)wq_.size(); }

 private:
  struct Entry {
    MemoryRequest* r;
    ps_t ready;                  // earliest the scheduler may act on it
    bool cas_issued = false;
    ps_t complete = kNeverPs;
  };
  struct Bank {
    int64_t open_row = -1;
    ps_t act_ready = 0;    // earliest next activate (tRP after precharge)
    ps_t cas_ready = 0;    // earliest column command (tRCD after activate)
    ps_t ras_ready = 0;    // earliest precharge (tRAS after activate)
    ps_t data_window = 0;  // precharge must clear in-flight column data
  };
  struct Candidate {
    CommandKind kind;
    Entry* e;
    ps_t at;
  };

  void sweep(ps_t now);
  void gather(std::vector<Entry>& queue, std::vector<Candidate>& out);
  ps_t earliest_for(const Candidate& c) const;
  void issue(const Candidate& c, ps_t at);
  int bank_index(const DramCoordinates& c) const {
    return c.rank * cfg_.banks_per_rank + c.bank;
  }
  int group_index(const DramCoordinates& c) const {
    return c.rank * cfg_.groups + c.bank % cfg_.groups;
  }

  ControllerConfig cfg_;
  CommandSink sink_;
  std::vector<Entry> rq_, wq_;
  std::vector<MemoryRequest*> done_;
  std::vector<Bank> banks_;
  std::vector<ps_t> group_last_cas_;
  ps_t bus_free_ = 0;
  ps_t last_cas_ = -kNeverPs;
  bool draining_ = false;
  bool dirty_ = true;
  ps_t wake_hint_ = 0;
  ps_t earliest_complete_ = kNeverPs;
};

// Uniform front door the cores and injectors talk to.
class MemorySystem {
 public:
  virtual ~MemorySystem() = default;
  virtual bool try_enqueue(MemoryRequest* r, ps_t now) = 0;
  virtual void advance(ps_t now) = 0;
  virtual void collect_completed(ps_t now, std::vector<MemoryRequest*>& out) = 0;
  virtual bool drained() const = 0;
  virtual void set_sink(CommandSink sink) = 0;
};

// Conventional parts: one controller per channel, address-sliced.
class DimmMemorySystem : public MemorySystem {
 public:
  DimmMemorySystem(const DramTypeSpec& spec, InterleaveMode mode);
  bool try_enqueue(MemoryRequest* r, ps_t now) override;
  void advance(ps_t now) override;
  void collect_completed(ps_t now, std::vector<MemoryRequest*>& out) override;
  bool drained() const override;
  void set_sink(CommandSink sink) override;
  ChannelController& channel(int i) { return *channels_[i]; }

 private:
  DramTypeSpec spec_;
  InterleaveMode mode_;
  std::vector<std::unique_ptr<ChannelController>> channels_;
};

struct HmcLinkParams {
  ps_t latency_ps = 8000;        // each direction
  int link_gbps = 320;           // serialization bound, full duplex
  int header_bytes = 16;
  int payload_bytes = 64;
  int fifo_capacity = 256;
};

// Stacked part: requests serialize over a link to per-vault sequencers on
// the logic layer; responses serialize back. Completion timestamps are taken
// at the host side of the link, DRAM-side data times are kept separately.
class HmcMemorySystem : public MemorySystem {
 public:
  HmcMemorySystem(const DramTypeSpec& spec, InterleaveMode mode,
                  const HmcLinkParams& link = {});
  bool try_enqueue(MemoryRequest* r, ps_t now) override;
  void advance(ps_t now) override;
  void collect_completed(ps_t now, std::vector<MemoryRequest*>& out) override;
  bool drained() const override;
  void set_sink(CommandSink sink) override;
  ChannelController& vault(int i) { return *vaults_[i]; }

 private:
  ps_t serialize_ps(int bytes) const {
    return ceil_div((ps_t)bytes * 1000, link_.link_gbps);
  }

  DramTypeSpec spec_;
  InterleaveMode mode_;
  HmcLinkParams link_;
  std::vector<std::unique_ptr<ChannelController>> vaults_;
  struct InFlight {
    MemoryRequest* r;
    ps_t at;
  };
  std::deque<InFlight> ingress_;
  std::vector<MemoryRequest*> responded_;
  std::vector<MemoryRequest*> scratch_;
  ps_t up_free_ = 0;
  ps_t down_free_ = 0;
};

// Controller configuration for one sequencer of the given device: a channel
// of a conventional part, or one vault of a stacked part.
ControllerConfig controller_config(const DramTypeSpec& spec, int channel_id);

std::unique_ptr<MemorySystem> make_memory_system(const DramTypeSpec& spec,
                                                 InterleaveMode mode,
                                                 const HmcLinkParams& link = {});

}  // namespace memsim
