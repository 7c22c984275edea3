#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "memsim/cache.h"
#include "memsim/request.h"
#include "memsim/trace.h"

namespace memsim {

enum class TranslationMode { random, identity };

TranslationMode parse_translation_mode(const std::string& s);
const char* to_string(TranslationMode m);

// First-touch virtual to physical mapping over fixed-size pages. Random mode
// hands out frames in a seeded permutation of the whole pool; identity mode
// pins frame == virtual page for experiments that need exact bank placement.
// A space id keys separate address spaces sharing one physical pool.
class PageTable {
 public:
  PageTable(TranslationMode mode, uint64_t seed, uint64_t page_bytes,
            uint64_t physical_bytes);

  uint64_t translate(int space, uint64_t vaddr);
  uint64_t frames_used() const { return next_frame_; }

 private:
  TranslationMode mode_;
  uint64_t page_bytes_;
  uint64_t frame_count_;
  uint64_t seed_;
  uint64_t next_frame_ = 0;
  std::unordered_map<uint64_t, uint64_t> map_;
  std::vector<uint32_t> perm_;
};

struct CoreParams {
  int window_size = 128;
  int width = 4;
  CacheGeometry l1{64 << 10, 4, 64, 4};
  CacheGeometry l2{256 << 10, 4, 64, 12};
  int l3_latency = 38;
  int outbox_cap = 64;  // un-presented memory ops before dispatch stalls
};

// One memory operation the core wants the memory system to perform. The
// engine turns these into controller requests once ready_cycle is reached.
struct CoreMemOp {
  bool is_write = false;
  uint64_t line_paddr = 0;
  int64_t ready_cycle = 0;
  bool count_stats = true;
  std::unique_ptr<MemoryRequest> staged;  // engine scratch for retries
};

// In-order 4-wide core replaying one trace through private L1/L2 and a
// shared L3. Reads occupy a window slot until their line arrives; bubbles
// and writes retire the cycle they dispatch. Dispatch runs before retire
// inside one tick, so a width-sized group of bubbles costs one cycle.
class CpuCore {
 public:
  CpuCore(int id, const CoreParams& p, TraceSource* trace, PageTable* pt,
          int space, CacheLevel* l3, uint64_t warmup_instructions,
          uint64_t max_instructions, bool restart_on_end);

  void tick(int64_t cycle);
  void on_fill(uint64_t line_paddr, int64_t cycle);

  int id() const { return id_; }
  bool finished_once() const { return finished_once_; }
  bool stats_active() const { return stats_active_; }
  bool quiescent() const {
    return dispatch_done_ && window_.empty() && outbox.empty();
  }

  uint64_t retired() const { return retired_; }
  int window_occupancy() const { return (int)window_.size(); }
  // Snapshots taken at first completion of the trace.
  uint64_t measured_instructions() const { return fin_retired_ - warm_retired_; }
  uint64_t measured_cycles() const { return (uint64_t)(fin_cycle_ - warm_cycle_); }
  uint64_t measured_misses() const { return fin_misses_; }
  int64_t finish_cycle() const { return fin_cycle_; }
  double ipc() const;
  double mpki_value() const;

  CacheLevel& l1() { return l1_; }
  CacheLevel& l2() { return l2_; }

  std::deque<CoreMemOp> outbox;

 private:
  struct Entry {
    uint64_t seq;
    int64_t done_cycle;
  };

  bool window_full() const { return (int)window_.size() >= params_.window_size; }
  bool capped() const {
    return max_instructions_ && dispatched_ >= max_instructions_;
  }
  bool try_dispatch_read(uint64_t vaddr, int64_t cycle);
  bool try_dispatch_write(uint64_t vaddr, int64_t cycle);
  void push_op(bool is_write, uint64_t line, int64_t cycle);
  void install_l1(uint64_t line, bool dirty, int64_t cycle);
  void install_l2(uint64_t line, bool dirty, int64_t cycle);
  void install_l3(uint64_t line, bool dirty, int64_t cycle);
  void on_pass_end(int64_t cycle, bool from_trace_end);
  void take_finish(int64_t cycle);
  void note_retired(int64_t cycle);

  int id_;
  CoreParams params_;
  TraceSource* trace_;
  PageTable* pt_;
  int space_;
  CacheLevel l1_;
  CacheLevel l2_;
  CacheLevel* l3_;
  uint64_t warmup_;
  uint64_t max_instructions_;
  bool restart_on_end_;

  std::deque<Entry> window_;
  uint64_t next_seq_ = 0;
  std::unordered_map<uint64_t, std::vector<uint64_t>> pending_fills_;

  TraceRecord rec_;
  bool have_rec_ = false;
  uint64_t bubbles_left_ = 0;
  bool read_todo_ = false;
  bool write_todo_ = false;

  bool dispatch_done_ = false;
  bool finished_once_ = false;
  bool frozen_ = false;
  bool has_last_ = false;
  uint64_t pass_last_seq_ = 0;

  uint64_t dispatched_ = 0;
  uint64_t retired_ = 0;
  int64_t last_retire_cycle_ = -1;
  uint64_t misses_ = 0;
  bool stats_active_ = false;
  // End-of-cycle snapshots; -1 names the instant before cycle 0 runs.
  int64_t warm_cycle_ = -1;
  uint64_t warm_retired_ = 0;
  int64_t fin_cycle_ = 0;
  uint64_t fin_retired_ = 0;
  uint64_t fin_misses_ = 0;
};

}  // namespace memsim
