#include "memsim/cache.h"

#include <cassert>

namespace memsim {

CacheLevel::CacheLevel(const CacheGeometry& geo) : geo_(geo) {
  if (geo_.size_bytes == 0 || geo_.ways <= 0 || geo_.line_bytes <= 0)
    throw ConfigError("cache geometry must be positive");
  if (!is_pow2((uint64_t)geo_.line_bytes))
    throw ConfigError("cache line size must be a power of two");
  uint64_t lines = geo_.size_bytes / (uint64_t)geo_.line_bytes;
  if (lines * (uint64_t)geo_.line_bytes != geo_.size_bytes)
    throw ConfigError("cache size must be a whole number of lines");
  if (lines % (uint64_t)geo_.ways != 0)
    throw ConfigError("cache ways must divide the line count");
  sets_count_ = lines / (uint64_t)geo_.ways;
  sets_.assign(sets_count_, std::vector<Way>(geo_.ways));
}

uint64_t CacheLevel::set_index(uint64_t addr) const {
  return (addr / (uint64_t)geo_.line_bytes) % sets_count_;
}

int CacheLevel::find_way(uint64_t set, uint64_t tag) const {
  const auto& ways = sets_[set];
  for (int w = 0; w < geo_.ways; ++w)
    if (ways[w].valid && ways[w].tag == tag) return w;
  return -1;
}

bool CacheLevel::access(uint64_t addr, bool mark_dirty) {
  uint64_t tag = addr / (uint64_t)geo_.line_bytes;
  uint64_t set = set_index(addr);
  int w = find_way(set, tag);
  if (w < 0) {
    ++misses;
    return false;
  }
  ++hits;
  sets_[set][w].last_use = ++tick_;
  if (mark_dirty) sets_[set][w].dirty = true;
  return true;
}

bool CacheLevel::contains(uint64_t addr) const {
  uint64_t tag = addr / (uint64_t)geo_.line_bytes;
  return find_way(set_index(addr), tag) >= 0;
}

std::optional<EvictedLine> CacheLevel::fill(uint64_t addr, bool dirty) {
  uint64_t tag = addr / (uint64_t)geo_.line_bytes;
  uint64_t set = set_index(addr);
  auto& ways = sets_[set];
  int w = find_way(set, tag);
  if (w >= 0) {
    ways[w].last_use = ++tick_;
    if (dirty) ways[w].dirty = true;
    return std::nullopt;
  }
  int victim = -1;
  for (int i = 0; i < geo_.ways; ++i) {
    if (!ways[i].valid) {
      victim = i;
      break;
    }
  }
  std::optional<EvictedLine> out;
  if (victim < 0) {
    victim = 0;
    for (int i = 1; i < geo_.ways; ++i)
      if (ways[i].last_use < ways[victim].last_use) victim = i;
    out = EvictedLine{ways[victim].tag * (uint64_t)geo_.line_bytes, ways[victim].dirty};
  }
  ways[victim] = Way{tag, true, dirty, ++tick_};
  return out;
}

std::optional<EvictedLine> CacheLevel::invalidate(uint64_t addr) {
  uint64_t tag = addr / (uint64_t)geo_.line_bytes;
  uint64_t set = set_index(addr);
  int w = find_way(set, tag);
  if (w < 0) return std::nullopt;
  EvictedLine out{tag * (uint64_t)geo_.line_bytes, sets_[set][w].dirty};
  sets_[set][w] = Way{};
  return out;
}

void CacheLevel::reset() {
  for (auto& set : sets_)
    for (auto& way : set) way = Way{};
  tick_ = 0;
  hits = 0;
  misses = 0;
}

}  // namespace memsim
