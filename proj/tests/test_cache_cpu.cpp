#include <doctest.h>

#include <set>
#include <vector>

#include "memsim/cpu.h"

using namespace memsim;

namespace {

// Enough ticks that any latency-bound work settles.
void run_cycles(CpuCore& core, int64_t from, int64_t count) {
  for (int64_t c = from; c < from + count; ++c) core.tick(c);
}

}  // namespace

TEST_CASE("cache geometry is validated before use") {
  CHECK_NOTHROW(CacheLevel({64 << 10, 4, 64, 4}));
  CHECK_THROWS_AS(CacheLevel({0, 4, 64, 4}), ConfigError);
  CHECK_THROWS_AS(CacheLevel({65'000, 4, 64, 4}), ConfigError);   // not a power of two
  CHECK_THROWS_AS(CacheLevel({64 << 10, 3, 64, 4}), ConfigError); // ways do not divide
  CHECK_THROWS_AS(CacheLevel({64 << 10, 4, 48, 4}), ConfigError); // line size
}

TEST_CASE("true LRU evicts the least recently touched way") {
  // 64 KiB, 4-way, 64 B lines: 256 sets; addresses 16384 apart share a set.
  CacheLevel c({64 << 10, 4, 64, 4});
  CHECK(c.sets() == 256);
  CHECK(c.set_index(0x0) == c.set_index(0x4000));
  CHECK(c.set_index(0x0) != c.set_index(0x1000));

  uint64_t lines[5];
  for (int i = 0; i < 5; ++i) lines[i] = 0x4000ull * i;

  for (int i = 0; i < 4; ++i) {
    CHECK_FALSE(c.access(lines[i], false));
    c.fill(lines[i], false);
  }
  for (int i = 0; i < 4; ++i) CHECK(c.access(lines[i], false));

  // A fifth line in the same set displaces the least recently used one.
  auto victim = c.fill(lines[4], false);
  REQUIRE(victim);
  CHECK(victim->addr == lines[0]);
  CHECK_FALSE(victim->dirty);
  CHECK_FALSE(c.contains(lines[0]));
  CHECK(c.contains(lines[4]));

  // Touch order decides: refresh line 1, then the next victim is line 2.
  CHECK(c.access(lines[1], false));
  c.fill(lines[0], false);
  CHECK_FALSE(c.contains(lines[2]));
  CHECK(c.contains(lines[1]));
}

TEST_CASE("five lines round-robin through a four-way set never hit") {
  CacheLevel c({64 << 10, 4, 64, 4});
  for (int pass = 0; pass < 3; ++pass)
    for (int i = 0; i < 5; ++i) {
      uint64_t addr = 0x4000ull * i;
      CHECK_FALSE(c.access(addr, false));
      c.fill(addr, false);
    }
  CHECK(c.hits == 0);
  CHECK(c.misses == 15);
}

TEST_CASE("dirty state survives refills and reports on eviction") {
  CacheLevel c({64 << 10, 4, 64, 4});
  c.fill(0x4000, true);
  // Re-filling a present line must not wash out the dirty bit.
  CHECK_FALSE(c.fill(0x4000, false).has_value());
  for (int i = 1; i <= 3; ++i) c.fill(0x4000ull * (i + 1), false);
  auto victim = c.fill(0x4000ull * 5, false);
  REQUIRE(victim);
  CHECK(victim->addr == 0x4000);
  CHECK(victim->dirty);

  c.fill(0x8000, false);
  CHECK(c.access(0x8000, true));  // write hit dirties in place
  auto inv = c.invalidate(0x8000);
  REQUIRE(inv);
  CHECK(inv->dirty);
  CHECK_FALSE(c.invalidate(0x8000).has_value());
  CHECK_FALSE(c.contains(0x8000));
}

TEST_CASE("sub-line addresses alias to their line") {
  CacheLevel c({64 << 10, 4, 64, 4});
  c.fill(0x1000, false);
  CHECK(c.access(0x103F, false));
  CHECK(c.contains(0x1020));
  CHECK(c.line_addr(0x103F) == 0x1000);
  c.reset();
  CHECK_FALSE(c.contains(0x1000));
}

TEST_CASE("identity translation preserves addresses and bounds them") {
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CHECK(pt.translate(0, 0x12345) == 0x12345);
  CHECK(pt.translate(3, 0x12345) == 0x12345);  // spaces collapse under identity
  CHECK_THROWS_AS(pt.translate(0, 1ull << 30), ConfigError);
}

TEST_CASE("random translation is stable, page-offset preserving, injective") {
  PageTable pt(TranslationMode::random, 7, 4096, 1ull << 30);
  std::set<uint64_t> frames;
  for (uint64_t page = 0; page < 500; ++page) {
    uint64_t va = page * 4096 + (page % 4096);
    uint64_t pa = pt.translate(0, va);
    CHECK((pa & 4095) == (va & 4095));
    CHECK(pa < (1ull << 30));
    CHECK(pt.translate(0, va) == pa);  // stable on revisit
    frames.insert(pa & ~4095ull);
  }
  CHECK(frames.size() == 500);
  CHECK(pt.frames_used() == 500);

  // Distinct spaces get distinct frames for the same virtual page.
  uint64_t a = pt.translate(1, 0x1000);
  uint64_t b = pt.translate(2, 0x1000);
  CHECK(a != b);

  // The same seed reproduces the same layout; a different seed does not.
  PageTable again(TranslationMode::random, 7, 4096, 1ull << 30);
  CHECK(again.translate(0, 0) == pt.translate(0, 0));
  PageTable other(TranslationMode::random, 8, 4096, 1ull << 30);
  bool differs = false;
  for (uint64_t page = 0; page < 64; ++page)
    if (other.translate(0, page * 4096) != pt.translate(0, page * 4096))
      differs = true;
  CHECK(differs);
}

TEST_CASE("the physical pool is finite") {
  PageTable pt(TranslationMode::random, 1, 4096, 1 << 20);  // 256 frames
  for (uint64_t page = 0; page < 256; ++page) pt.translate(0, page * 4096);
  CHECK_THROWS_AS(pt.translate(0, 256 * 4096), ConfigError);
}

TEST_CASE("four hundred bubbles retire in exactly one hundred cycles") {
  VectorTraceSource trace({{400, std::nullopt, std::nullopt}});
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  run_cycles(core, 0, 200);
  REQUIRE(core.finished_once());
  CHECK(core.measured_instructions() == 400);
  CHECK(core.measured_cycles() == 100);
  CHECK(core.ipc() == doctest::Approx(4.0));
  CHECK(core.mpki_value() == 0.0);
  CHECK(core.outbox.empty());
}

TEST_CASE("a pending read blocks retirement until its line arrives") {
  VectorTraceSource trace({{0, 0x10000, std::nullopt}, {10, std::nullopt, std::nullopt}});
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  run_cycles(core, 0, 50);
  // The read missed everywhere: one memory op queued, nothing retired.
  CHECK_FALSE(core.finished_once());
  CHECK(core.retired() == 0);
  REQUIRE(core.outbox.size() == 1);
  CHECK_FALSE(core.outbox.front().is_write);
  CHECK(core.outbox.front().line_paddr == 0x10000);
  CHECK(core.outbox.front().ready_cycle == 38);  // shared-cache lookup first

  core.on_fill(0x10000, 50);
  run_cycles(core, 51, 20);
  CHECK(core.finished_once());
  CHECK(core.measured_instructions() == 11);
  CHECK(core.measured_misses() == 1);
}

TEST_CASE("writes retire immediately and fill in the background") {
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 40; ++i)
    recs.push_back({0, std::nullopt, 0x100000ull + 64ull * i});
  VectorTraceSource trace(recs);
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  run_cycles(core, 0, 30);
  // All forty writes retired at full width without waiting on memory.
  CHECK(core.finished_once());
  CHECK(core.measured_instructions() == 40);
  CHECK(core.measured_cycles() == 10);
  // Every line was a miss: one background fill read each.
  CHECK(core.outbox.size() == 40);
  CHECK_FALSE(core.outbox.front().is_write);
  CHECK(core.measured_misses() == 40);
  // The lines were installed: a second pass of reads hits in the L1.
  CHECK(core.l1().contains(0x100000));
}

TEST_CASE("the window never holds more than its capacity") {
  // Reads behind one unresolved miss: the window fills, one fill pends.
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 300; ++i)
    recs.push_back({0, 0x200000ull, std::nullopt});
  VectorTraceSource trace(recs);
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CoreParams params;
  CpuCore core(0, params, &trace, &pt, 0, &l3, 0, 0, false);
  int peak = 0;
  for (int64_t c = 0; c < 200; ++c) {
    core.tick(c);
    peak = std::max(peak, core.window_occupancy());
  }
  CHECK(peak == params.window_size);
  CHECK(core.retired() == 0);
  CHECK(core.outbox.size() == 1);
}

TEST_CASE("the outbox cap throttles dispatch of distinct misses") {
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 300; ++i)
    recs.push_back({0, 0x200000ull + 64ull * i, std::nullopt});
  VectorTraceSource trace(recs);
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CoreParams params;
  CpuCore core(0, params, &trace, &pt, 0, &l3, 0, 0, false);
  int peak = 0;
  for (int64_t c = 0; c < 200; ++c) {
    core.tick(c);
    peak = std::max(peak, (int)core.outbox.size());
  }
  CHECK(peak == params.outbox_cap);
  CHECK(core.window_occupancy() == params.outbox_cap);
  CHECK(core.retired() == 0);
}

TEST_CASE("repeat reads to one line coalesce into a single fill") {
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 8; ++i) recs.push_back({0, 0x40000ull, std::nullopt});
  VectorTraceSource trace(recs);
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  run_cycles(core, 0, 10);
  CHECK(core.outbox.size() == 1);  // the other seven wait on the same line
  core.on_fill(0x40000, 10);
  run_cycles(core, 11, 20);
  CHECK(core.finished_once());
  CHECK(core.measured_misses() == 1);
  CHECK(core.measured_instructions() == 8);
}

TEST_CASE("cache hits keep the pipeline at full width") {
  std::vector<TraceRecord> recs;
  recs.push_back({0, 0x7000, std::nullopt});
  for (int i = 0; i < 99; ++i) recs.push_back({0, 0x7000ull, std::nullopt});
  VectorTraceSource trace(recs);
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  core.tick(0);
  core.on_fill(0x7000, 1);
  run_cycles(core, 1, 200);
  REQUIRE(core.finished_once());
  CHECK(core.measured_misses() == 1);
  CHECK(core.ipc() > 2.0);  // L1 hits pipeline at width, the miss costs once
}

TEST_CASE("warmup freezes statistics to the measured region") {
  // 100 warmup instructions, then 400 measured bubbles.
  VectorTraceSource trace({{500, std::nullopt, std::nullopt}});
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 100, 0, false);
  run_cycles(core, 0, 300);
  REQUIRE(core.finished_once());
  CHECK(core.measured_instructions() == 400);
  CHECK(core.measured_cycles() == 100);
  CHECK(core.ipc() == doctest::Approx(4.0));
}

TEST_CASE("an instruction cap ends the pass mid-trace") {
  VectorTraceSource trace({{1'000'000, std::nullopt, std::nullopt}});
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 2'000, false);
  run_cycles(core, 0, 1'000);
  REQUIRE(core.finished_once());
  CHECK(core.measured_instructions() == 2'000);
  CHECK(core.measured_cycles() == 500);
}

TEST_CASE("the dirty chain flows down the hierarchy on eviction") {
  // Write-allocate: a written line is dirty in L1; pushing it out of L1
  // moves the dirty state to L2 rather than to memory.
  PageTable pt(TranslationMode::identity, 1, 4096, 1ull << 30);
  CacheLevel l3({2ull << 20, 8, 64, 38});
  std::vector<TraceRecord> recs;
  recs.push_back({0, std::nullopt, 0x0ull});
  // 4 more writes into the same L1 set (16 KiB apart) evict the first line.
  for (int i = 1; i <= 4; ++i) recs.push_back({0, std::nullopt, 0x4000ull * i});
  VectorTraceSource trace(recs);
  CpuCore core(0, CoreParams{}, &trace, &pt, 0, &l3, 0, 0, false);
  run_cycles(core, 0, 20);
  REQUIRE(core.finished_once());
  CHECK_FALSE(core.l1().contains(0x0));
  CHECK(core.l2().contains(0x0));
  auto moved = core.l2().invalidate(0x0);
  REQUIRE(moved);
  CHECK(moved->dirty);
}
