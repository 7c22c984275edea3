#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "memsim/common.h"

namespace memsim {

struct CacheGeometry {
  uint64_t size_bytes = 0;
  int ways = 0;
  int line_bytes = 64;
  int latency_cycles = 0;
};

struct EvictedLine {
  uint64_t addr = 0;
  bool dirty = false;
};

// Set-associative write-back cache with true LRU replacement.
// Tracks tags only; data never moves through the model.
class CacheLevel {
 public:
  explicit CacheLevel(const CacheGeometry& geo);

  // True on hit. A hit refreshes LRU state; mark_dirty additionally
  // marks the line modified.
  bool access(uint64_t addr, bool mark_dirty);

  // True if present, without touching LRU or dirty state.
  bool contains(uint64_t addr) const;

  // Installs the line, evicting LRU if the set is full. Returns the
  // victim when one was displaced.
  std::optional<EvictedLine> fill(uint64_t addr, bool dirty);

  // Removes the line if present, reporting it for writeback handling.
  std::optional<EvictedLine> invalidate(uint64_t addr);

  void reset();

  const CacheGeometry& geometry() const { return geo_; }
  int sets() const { return (int)sets_count_; }
  uint64_t set_index(uint64_t addr) const;
  uint64_t line_addr(uint64_t addr) const { return addr & ~(uint64_t)(geo_.line_bytes - 1); }

  uint64_t hits = 0;
  uint64_t misses = 0;

 private:
  struct Way {
    uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    uint64_t last_use = 0;
  };

  int find_way(uint64_t set, uint64_t tag) const;

  CacheGeometry geo_;
  uint64_t sets_count_ = 0;
  uint64_t tick_ = 0;
  std::vector<std::vector<Way>> sets_;
};

}  // namespace memsim
