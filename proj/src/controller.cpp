#include "memsim/controller.h"

#include <algorithm>
#include <cassert>

namespace memsim {

ChannelController::ChannelController(const ControllerConfig& cfg) : cfg_(cfg) {
  assert(cfg_.groups >= 1);
  banks_.resize((size_t)cfg_.ranks * cfg_.banks_per_rank);
  group_last_cas_.assign((size_t)cfg_.ranks * cfg_.groups, -kNeverPs);
}

void ChannelController::sweep(ps_t now) {
  if (now < earliest_complete_) return;
  earliest_complete_ = kNeverPs;
  auto take = [&](std::vector<Entry>& q) {
    size_t w = 0;
    for (size_t i = 0; i < q.size(); ++i) {
      if (q[i].complete <= now) {
        done_.push_back(q[i].r);
      } else {
        earliest_complete_ = std::min(earliest_complete_, q[i].complete);
        q[w++] = q[i];
      }
    }
    q.resize(w);
  };
  take(rq_);
  take(wq_);
}

bool ChannelController::can_accept(bool is_write, ps_t now) {
  sweep(now);
  return is_write ? (int)wq_.size() < cfg_.wq_depth
                  : (int)rq_.size() < cfg_.rq_depth;
}

void ChannelController::enqueue(MemoryRequest* r, ps_t ready_ps) {
  auto& q = r->is_write ? wq_ : rq_;
  assert((int)q.size() < (r->is_write ? cfg_.wq_depth : cfg_.rq_depth));
  q.push_back(Entry{r, ready_ps});
  dirty_ = true;
}

ps_t ChannelController::earliest_for(const Candidate& c) const {
  const Bank& b = banks_[bank_index(c.e->r->coords)];
  ps_t at = std::max(bus_free_, c.e->ready);
  switch (c.kind) {
    case CommandKind::read:
    case CommandKind::write:
      at = std::max(at, b.cas_ready);
      at = std::max(at, last_cas_ + cfg_.timing.tccd_other_group_ps);
      if (cfg_.groups > 1)
        at = std::max(at, group_last_cas_[group_index(c.e->r->coords)] +
                              cfg_.timing.tccd_same_group_ps);
      break;
    case CommandKind::activate:
      at = std::max(at, b.act_ready);
      break;
    case CommandKind::precharge:
      at = std::max(at, std::max(b.ras_ready, b.data_window));
      break;
  }
  return at;
}

// Candidate commands for one queue: every request whose row is open offers
// its column command; per bank, the oldest request that needs the row
// changed owns the activate/precharge sequence.
void ChannelController::gather(std::vector<Entry>& queue,
                               std::vector<Candidate>& out) {
  // Small queues; linear scans beat bookkeeping here.
  for (auto& e : queue) {
    if (e.cas_issued) continue;
    const Bank& b = banks_[bank_index(e.r->coords)];
    if (b.open_row == e.r->coords.row) {
      out.push_back({e.r->is_write ? CommandKind::write : CommandKind::read, &e, 0});
    } else {
      bool owner = true;
      bool open_row_pending = false;
      for (auto& o : queue) {
        if (o.cas_issued || &o == &e) continue;
        if (bank_index(o.r->coords) != bank_index(e.r->coords)) continue;
        if (o.r->coords.row == b.open_row) {
          open_row_pending = true;
          continue;
        }
        if (o.r->id < e.r->id) {
          owner = false;
          break;
        }
      }
      // Row hits drain before the open row may be closed.
      if (owner && !(b.open_row >= 0 && open_row_pending))
        out.push_back({b.open_row < 0 ? CommandKind::activate
                                      : CommandKind::precharge,
                       &e, 0});
    }
  }
}

void ChannelController::issue(const Candidate& c, ps_t at) {
  MemoryRequest* r = c.e->r;
  Bank& b = banks_[bank_index(r->coords)];
  bus_free_ = at + cfg_.timing.clock_ps;

  if (r->first_command_ps < 0) {
    r->first_command_ps = at;
    assert(r->cls == LocalityClass::unclassified);
    switch (c.kind) {
      case CommandKind::read:
      case CommandKind::write: r->cls = LocalityClass::hit; break;
      case CommandKind::activate: r->cls = LocalityClass::miss; break;
      case CommandKind::precharge: r->cls = LocalityClass::conflict; break;
    }
  }

  switch (c.kind) {
    case CommandKind::activate:
      b.open_row = r->coords.row;
      b.cas_ready = at + cfg_.timing.trcd_ps;
      b.ras_ready = at + cfg_.timing.tras_ps;
      break;
    case CommandKind::precharge:
      b.open_row = -1;
      b.act_ready = at + cfg_.timing.trp_ps;
      break;
    case CommandKind::read:
    case CommandKind::write: {
      last_cas_ = at;
      if (cfg_.groups > 1) group_last_cas_[group_index(r->coords)] = at;
      bool is_rd = c.kind == CommandKind::read;
      ps_t done = at + (is_rd ? cfg_.timing.tcas_ps : cfg_.timing.burst_ps);
      b.data_window = at + (is_rd ? cfg_.timing.tcas_ps + cfg_.timing.burst_ps
                                  : cfg_.timing.burst_ps);
      c.e->cas_issued = true;
      c.e->complete = done;
      r->dram_complete_ps = done;
      r->completion_ps = done;
      earliest_complete_ = std::min(earliest_complete_, done);
      break;
    }
  }

  if (sink_) sink_({at, cfg_.channel_id, c.kind, r->coords, r->id});
}

void ChannelController::advance(ps_t now) {
  if (!dirty_ && wake_hint_ > now) return;
  std::vector<Candidate> cands;
  while (true) {
    sweep(now);
    if (draining_ && (int)wq_.size() <= cfg_.wq_drain_low) draining_ = false;
    if (!draining_ && (int)wq_.size() >= cfg_.wq_drain_high) draining_ = true;

    cands.clear();
    if (draining_) {
      gather(wq_, cands);
    } else {
      gather(rq_, cands);
      if (cands.empty()) gather(wq_, cands);  // reads idle, slip writes out
    }
    if (cands.empty()) {
      wake_hint_ = kNeverPs;
      dirty_ = false;
      return;
    }
    ps_t best = kNeverPs;
    for (auto& c : cands) {
      c.at = earliest_for(c);
      best = std::min(best, c.at);
    }
    if (best > now) {
      wake_hint_ = best;
      dirty_ = false;
      return;
    }
    const Candidate* pick = nullptr;
    for (const auto& c : cands) {
      if (c.at != best) continue;
      bool c_cas = c.kind == CommandKind::read || c.kind == CommandKind::write;
      if (!pick) {
        pick = &c;
        continue;
      }
      bool p_cas = pick->kind == CommandKind::read || pick->kind == CommandKind::write;
      if (c_cas != p_cas ? c_cas : c.e->r->id < pick->e->r->id) pick = &c;
    }
    issue(*pick, best);
  }
}

void ChannelController::collect_completed(ps_t now, std::vector<MemoryRequest*>& out) {
  sweep(now);
  if (done_.empty()) return;
  out.insert(out.end(), done_.begin(), done_.end());
  done_.clear();
}

bool ChannelController::drained() const {
  return rq_.empty() && wq_.empty() && done_.empty();
}

ps_t ChannelController::next_event_hint() const {
  ps_t h = std::min(wake_hint_, earliest_complete_);
  return dirty_ ? 0 : h;
}

ControllerConfig controller_config(const DramTypeSpec& spec, int channel_id) {
  ControllerConfig cfg;
  cfg.timing = derive_timings(spec);
  cfg.channel_id = channel_id;
  if (spec.stacked()) {
    cfg.ranks = 1;
    cfg.banks_per_rank = spec.banks_per_vault();
    cfg.groups = 1;
  } else {
    cfg.ranks = spec.ranks_per_channel;
    cfg.banks_per_rank = spec.banks_per_rank;
    cfg.groups = spec.bank_groups > 1 ? spec.bank_groups : 1;
  }
  cfg.rq_depth = spec.queue_depth_read;
  cfg.wq_depth = spec.queue_depth_write;
  return cfg;
}

DimmMemorySystem::DimmMemorySystem(const DramTypeSpec& spec, InterleaveMode mode)
    : spec_(spec), mode_(mode) {
  for (int c = 0; c < spec_.channels; ++c)
    channels_.push_back(std::make_unique<ChannelController>(controller_config(spec_, c)));
}

bool DimmMemorySystem::try_enqueue(MemoryRequest* r, ps_t now) {
  r->coords = map_address(r->paddr, spec_, mode_);
  ChannelController& ch = *channels_[r->coords.channel];
  if (!ch.can_accept(r->is_write, now)) return false;
  ch.enqueue(r, r->arrival_ps);
  return true;
}

void DimmMemorySystem::advance(ps_t now) {
  for (auto& ch : channels_) ch->advance(now);
}

void DimmMemorySystem::collect_completed(ps_t now, std::vector<MemoryRequest*>& out) {
  for (auto& ch : channels_) ch->collect_completed(now, out);
}

bool DimmMemorySystem::drained() const {
  return std::all_of(channels_.begin(), channels_.end(),
                     [](const auto& c) { return c->drained(); });
}

void DimmMemorySystem::set_sink(CommandSink sink) {
  for (auto& ch : channels_) ch->set_sink(sink);
}

HmcMemorySystem::HmcMemorySystem(const DramTypeSpec& spec, InterleaveMode mode,
                                 const HmcLinkParams& link)
    : spec_(spec), mode_(mode), link_(link) {
  for (int v = 0; v < spec_.vaults; ++v)
    vaults_.push_back(std::make_unique<ChannelController>(controller_config(spec_, v)));
}

bool HmcMemorySystem::try_enqueue(MemoryRequest* r, ps_t now) {
  if ((int)ingress_.size() >= link_.fifo_capacity) return false;
  r->coords = map_address(r->paddr, spec_, mode_);
  int bytes = link_.header_bytes + (r->is_write ? link_.payload_bytes : 0);
  ps_t start = std::max(now, up_free_);
  up_free_ = start + serialize_ps(bytes);
  ingress_.push_back({r, up_free_ + link_.latency_ps});
  return true;
}

void HmcMemorySystem::advance(ps_t now) {
  // Deliver serialized requests to their vault queues in link order; a full
  // vault queue blocks the head.
  while (!ingress_.empty() && ingress_.front().at <= now) {
    MemoryRequest* r = ingress_.front().r;
    ChannelController& v = *vaults_[r->coords.vault];
    if (!v.can_accept(r->is_write, now)) break;
    v.enqueue(r, ingress_.front().at);
    ingress_.pop_front();
  }
  for (auto& v : vaults_) v->advance(now);

  scratch_.clear();
  for (auto& v : vaults_) v->collect_completed(now, scratch_);
  std::sort(scratch_.begin(), scratch_.end(),
            [](const MemoryRequest* a, const MemoryRequest* b) {
              return a->dram_complete_ps != b->dram_complete_ps
                         ? a->dram_complete_ps < b->dram_complete_ps
                         : a->id < b->id;
            });
  for (MemoryRequest* r : scratch_) {
    int bytes = link_.header_bytes + (r->is_write ? 0 : link_.payload_bytes);
    ps_t start = std::max(r->dram_complete_ps, down_free_);
    down_free_ = start + serialize_ps(bytes);
    r->completion_ps = down_free_ + link_.latency_ps;
    responded_.push_back(r);
  }
}

void HmcMemorySystem::collect_completed(ps_t now, std::vector<MemoryRequest*>& out) {
  size_t w = 0;
  for (size_t i = 0; i < responded_.size(); ++i) {
    if (responded_[i]->completion_ps <= now)
      out.push_back(responded_[i]);
    else
      responded_[w++] = responded_[i];
  }
  responded_.resize(w);
}

bool HmcMemorySystem::drained() const {
  if (!ingress_.empty() || !responded_.empty()) return false;
  return std::all_of(vaults_.begin(), vaults_.end(),
                     [](const auto& v) { return v->drained(); });
}

void HmcMemorySystem::set_sink(CommandSink sink) {
  for (auto& v : vaults_) v->set_sink(sink);
}

std::unique_ptr<MemorySystem> make_memory_system(const DramTypeSpec& spec,
                                                 InterleaveMode mode,
                                                 const HmcLinkParams& link) {
  if (spec.stacked()) return std::make_unique<HmcMemorySystem>(spec, mode, link);
  return std::make_unique<DimmMemorySystem>(spec, mode);
}

}  // namespace memsim
