#include "memsim/cpu.h"

#include <algorithm>
#include <cassert>
#include <random>

namespace memsim {

TranslationMode parse_translation_mode(const std::string& s) {
  if (s == "random") return TranslationMode::random;
  if (s == "identity") return TranslationMode::identity;
  throw ConfigError("unknown translation mode '" + s + "'");
}

const char* to_string(TranslationMode m) {
  return m == TranslationMode::random ? "random" : "identity";
}

PageTable::PageTable(TranslationMode mode, uint64_t seed, uint64_t page_bytes,
                     uint64_t physical_bytes)
    : mode_(mode), page_bytes_(page_bytes), seed_(seed) {
  if (page_bytes_ == 0 || !is_pow2(page_bytes_))
    throw ConfigError("page size must be a power of two");
  if (physical_bytes % page_bytes_ != 0)
    throw ConfigError("physical capacity must be a whole number of pages");
  frame_count_ = physical_bytes / page_bytes_;
  if (frame_count_ == 0 || frame_count_ > (1ull << 32))
    throw ConfigError("unsupported physical frame count");
}

uint64_t PageTable::translate(int space, uint64_t vaddr) {
  uint64_t page = vaddr / page_bytes_;
  uint64_t offset = vaddr % page_bytes_;
  if (mode_ == TranslationMode::identity) {
    if (page >= frame_count_)
      throw ConfigError("identity translation needs vaddr below physical capacity");
    return page * page_bytes_ + offset;
  }
  assert(space >= 0 && space < 32);
  uint64_t key = (page << 5) | (uint64_t)space;
  auto it = map_.find(key);
  if (it == map_.end()) {
    if (perm_.empty()) {
      perm_.resize(frame_count_);
      for (uint64_t i = 0; i < frame_count_; ++i) perm_[i] = (uint32_t)i;
      std::mt19937_64 rng(seed_ ^ 0xA24BAED4963EE407ull);
      std::shuffle(perm_.begin(), perm_.end(), rng);
    }
    if (next_frame_ >= frame_count_)
      throw ConfigError("physical memory exhausted during translation");
    it = map_.emplace(key, perm_[next_frame_++]).first;
  }
  return it->second * page_bytes_ + offset;
}

CpuCore::CpuCore(int id, const CoreParams& p, TraceSource* trace, PageTable* pt,
                 int space, CacheLevel* l3, uint64_t warmup_instructions,
                 uint64_t max_instructions, bool restart_on_end)
    : id_(id),
      params_(p),
      trace_(trace),
      pt_(pt),
      space_(space),
      l1_(p.l1),
      l2_(p.l2),
      l3_(l3),
      warmup_(warmup_instructions),
      max_instructions_(max_instructions),
      restart_on_end_(restart_on_end) {
  if (warmup_ == 0) stats_active_ = true;
}

double CpuCore::ipc() const {
  uint64_t cyc = measured_cycles();
  return cyc ? (double)measured_instructions() / (double)cyc : 0.0;
}

double CpuCore::mpki_value() const {
  uint64_t instr = measured_instructions();
  return instr ? (double)fin_misses_ * 1000.0 / (double)instr : 0.0;
}

void CpuCore::push_op(bool is_write, uint64_t line, int64_t cycle) {
  CoreMemOp op;
  op.is_write = is_write;
  op.line_paddr = line;
  op.ready_cycle = cycle + params_.l3_latency;
  op.count_stats = stats_active_ && !frozen_;
  outbox.push_back(std::move(op));
}

void CpuCore::install_l3(uint64_t line, bool dirty, int64_t cycle) {
  if (auto v = l3_->fill(line, dirty); v && v->dirty)
    push_op(true, v->addr, cycle);
}

void CpuCore::install_l2(uint64_t line, bool dirty, int64_t cycle) {
  if (auto v = l2_.fill(line, dirty); v && v->dirty)
    install_l3(v->addr, true, cycle);
}

void CpuCore::install_l1(uint64_t line, bool dirty, int64_t cycle) {
  if (auto v = l1_.fill(line, dirty); v && v->dirty)
    install_l2(v->addr, true, cycle);
}

bool CpuCore::try_dispatch_read(uint64_t vaddr, int64_t cycle) {
  uint64_t line = l1_.line_addr(pt_->translate(space_, vaddr));
  bool resident = l1_.contains(line) || l2_.contains(line) || l3_->contains(line);
  bool needs_fill = !resident && !pending_fills_.count(line);
  if (needs_fill && (int)outbox.size() >= params_.outbox_cap) return false;

  Entry e{next_seq_++, 0};
  if (l1_.access(line, false)) {
    e.done_cycle = cycle + l1_.geometry().latency_cycles;
  } else if (l2_.access(line, false)) {
    e.done_cycle = cycle + l2_.geometry().latency_cycles;
    install_l1(line, false, cycle);
  } else if (l3_->access(line, false)) {
    e.done_cycle = cycle + params_.l3_latency;
    install_l2(line, false, cycle);
    install_l1(line, false, cycle);
  } else {
    e.done_cycle = kNeverPs;
    auto [it, inserted] = pending_fills_.try_emplace(line);
    it->second.push_back(e.seq);
    if (inserted) {
      push_op(false, line, cycle);
      // Counted through warmup and zeroed at the boundary, so a run that
      // ends inside warmup still has whole-run misses to fall back on.
      if (!frozen_) ++misses_;
    }
  }
  window_.push_back(e);
  return true;
}

bool CpuCore::try_dispatch_write(uint64_t vaddr, int64_t cycle) {
  uint64_t line = l1_.line_addr(pt_->translate(space_, vaddr));
  bool resident = l1_.contains(line) || l2_.contains(line) || l3_->contains(line);
  bool needs_fill = !resident && !pending_fills_.count(line);
  if (needs_fill && (int)outbox.size() >= params_.outbox_cap) return false;

  if (l1_.access(line, true)) {
    // dirty in place
  } else if (l2_.access(line, false)) {
    install_l1(line, true, cycle);
  } else if (l3_->access(line, false)) {
    install_l2(line, false, cycle);
    install_l1(line, true, cycle);
  } else {
    // Write allocate without stalling: the line lands now, the fill read
    // runs in the background purely for memory traffic.
    if (needs_fill) {
      pending_fills_.try_emplace(line);
      push_op(false, line, cycle);
      if (!frozen_) ++misses_;
    }
    install_l3(line, false, cycle);
    install_l2(line, false, cycle);
    install_l1(line, true, cycle);
  }
  window_.push_back(Entry{next_seq_++, cycle});
  return true;
}

void CpuCore::on_fill(uint64_t line, int64_t cycle) {
  install_l3(line, false, cycle);
  install_l2(line, false, cycle);
  install_l1(line, false, cycle);
  auto it = pending_fills_.find(line);
  if (it == pending_fills_.end()) return;
  for (uint64_t seq : it->second)
    for (auto& e : window_)
      if (e.seq == seq) {
        e.done_cycle = cycle;
        break;
      }
  pending_fills_.erase(it);
}

void CpuCore::take_finish(int64_t cycle) {
  finished_once_ = true;
  frozen_ = true;
  if (!stats_active_) {
    // Trace shorter than the warmup window: fall back to whole-run numbers.
    warm_cycle_ = -1;
    warm_retired_ = 0;
  }
  fin_cycle_ = std::max(cycle, warm_cycle_ + 1);
  fin_retired_ = retired_;
  fin_misses_ = misses_;
}

void CpuCore::on_pass_end(int64_t cycle, bool from_trace_end) {
  if (!finished_once_ && !has_last_) {
    if (window_.empty()) {
      // The program ended when its last instruction retired, not when the
      // fetch stage noticed the trace was empty one cycle later.
      take_finish(last_retire_cycle_ >= 0 ? last_retire_cycle_ : cycle);
    } else {
      has_last_ = true;
      pass_last_seq_ = next_seq_ - 1;
    }
  }
  if (from_trace_end && restart_on_end_) trace_->rewind();
}

void CpuCore::note_retired(int64_t cycle) {
  last_retire_cycle_ = cycle;
  if (!stats_active_ && retired_ >= warmup_) {
    stats_active_ = true;
    warm_cycle_ = cycle;
    warm_retired_ = retired_;
    misses_ = 0;
  }
}

void CpuCore::tick(int64_t cycle) {
  int slots = params_.width;
  int retire_budget = params_.width;

  while (slots > 0 && !dispatch_done_) {
    if (capped()) {
      on_pass_end(cycle, false);
      dispatch_done_ = true;
      break;
    }
    if (!have_rec_) {
      auto r = trace_->next();
      if (!r) {
        on_pass_end(cycle, true);
        if (!restart_on_end_) {
          dispatch_done_ = true;
          break;
        }
        r = trace_->next();
        if (!r) {
          dispatch_done_ = true;
          break;
        }
      }
      rec_ = *r;
      have_rec_ = true;
      bubbles_left_ = rec_.bubbles;
      read_todo_ = rec_.read_addr.has_value();
      write_todo_ = rec_.write_addr.has_value();
    }
    if (bubbles_left_ > 0) {
      uint64_t run = bubbles_left_;
      if (max_instructions_) run = std::min(run, max_instructions_ - dispatched_);
      if (window_.empty() && retire_budget > 0) {
        // Nothing older is pending, so these retire the cycle they issue.
        int n = (int)std::min<uint64_t>(std::min(slots, retire_budget), run);
        bubbles_left_ -= n;
        dispatched_ += n;
        retired_ += n;
        slots -= n;
        retire_budget -= n;
        note_retired(cycle);
        if (slots == 0) break;
        continue;
      }
      if (window_full()) break;
      int room = params_.window_size - (int)window_.size();
      int n = (int)std::min<uint64_t>(std::min(slots, room), run);
      for (int i = 0; i < n; ++i) window_.push_back(Entry{next_seq_++, cycle});
      bubbles_left_ -= n;
      dispatched_ += n;
      slots -= n;
      continue;
    }
    if (read_todo_) {
      if (window_full()) break;
      if (!try_dispatch_read(*rec_.read_addr, cycle)) break;
      read_todo_ = false;
      ++dispatched_;
      --slots;
      continue;
    }
    if (write_todo_) {
      if (window_full()) break;
      if (!try_dispatch_write(*rec_.write_addr, cycle)) break;
      write_todo_ = false;
      ++dispatched_;
      --slots;
      continue;
    }
    have_rec_ = false;
  }

  while (retire_budget > 0 && !window_.empty() &&
         window_.front().done_cycle <= cycle) {
    uint64_t seq = window_.front().seq;
    window_.pop_front();
    ++retired_;
    --retire_budget;
    note_retired(cycle);
    if (has_last_ && !finished_once_ && seq == pass_last_seq_) take_finish(cycle);
  }
}

}  // namespace memsim
