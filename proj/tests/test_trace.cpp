#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "memsim/trace.h"

using namespace memsim;

namespace {

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace

TEST_CASE("text record parsing accepts the documented forms") {
  TraceRecord r = parse_trace_record("12 R:0x1A2B W:3C");
  CHECK(r.bubbles == 12);
  CHECK(r.read_addr == 0x1A2Bu);
  CHECK(r.write_addr == 0x3Cu);
  CHECK(r.instructions() == 14);

  CHECK(parse_trace_record("7").bubbles == 7);
  CHECK(parse_trace_record("0 W:ff").write_addr == 0xFFu);
  CHECK(parse_trace_record("3 r:10 w:20").read_addr == 0x10u);
  CHECK(parse_trace_record("5 R:1 # trailing comment").read_addr == 1u);
  CHECK(parse_trace_record("5\tR:0X2a").read_addr == 0x2Au);
}

TEST_CASE("text record parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_trace_record(""), TraceError);
  CHECK_THROWS_AS(parse_trace_record("# only a comment"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("-3 R:10"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("abc"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("1.5 R:10"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("3 R:10 R:20"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("3 W:10 W:20"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("3 X:10"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("3 R:zz"), TraceError);
  CHECK_THROWS_AS(parse_trace_record("0"), TraceError);  // no instructions at all
  // Error text carries the line number when one is given.
  try {
    parse_trace_record("bogus", 17);
    FAIL("expected a throw");
  } catch (const TraceError& e) {
    CHECK(std::string(e.what()).find("line 17") != std::string::npos);
  }
}

TEST_CASE("formatting and reparsing is the identity") {
  std::vector<TraceRecord> recs = {
      {0, 0x1234, std::nullopt},
      {99, std::nullopt, 0xDEADBEEFull},
      {1, 0xFFFFFFFFFFFFull, 0x40ull},
      {7, std::nullopt, std::nullopt},
  };
  for (const auto& r : recs) CHECK(parse_trace_record(format_trace_record(r)) == r);
}

TEST_CASE("text and binary files round-trip and the reader sniffs both") {
  std::vector<TraceRecord> recs;
  for (int i = 0; i < 300; ++i) {
    TraceRecord r;
    r.bubbles = (uint64_t)i * 129;  // crosses several varint widths
    if (i % 3 == 0) r.read_addr = 0x1000ull * i;
    if (i % 5 == 0) r.write_addr = 0x2000ull * i + 64;
    if (!r.instructions()) r.bubbles = 1;
    recs.push_back(r);
  }
  std::string tpath = temp_path("memsim_trace_rt.txt");
  std::string bpath = temp_path("memsim_trace_rt.bin");
  write_text_trace(tpath, recs);
  write_binary_trace(bpath, recs);
  CHECK(read_trace(tpath) == recs);
  CHECK(read_trace(bpath) == recs);

  // The binary file must be smaller than its text form for this mix.
  CHECK(std::filesystem::file_size(bpath) < std::filesystem::file_size(tpath));
  std::remove(tpath.c_str());
  std::remove(bpath.c_str());
}

TEST_CASE("binary reader rejects damage") {
  std::string path = temp_path("memsim_trace_bad.bin");
  std::vector<TraceRecord> recs = {{3, 0x40ull, std::nullopt}};
  write_binary_trace(path, recs);

  auto truncate_to = [&](size_t n) {
    auto bytes = std::vector<char>(n);
    std::ifstream in(path, std::ios::binary);
    in.read(bytes.data(), (std::streamsize)n);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), (std::streamsize)n);
  };

  SUBCASE("truncated address") {
    truncate_to(5 + 2 + 4);  // header, varint+flags, half an address
    auto src = open_trace(path);
    CHECK_THROWS_AS(src->next(), TraceError);
  }
  SUBCASE("bad magic falls back to text and fails there") {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOPE" << '\x01';
    out.close();
    auto src = open_trace(path);
    CHECK_THROWS_AS(src->next(), TraceError);
  }
  SUBCASE("wrong version") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4);
    f.put('\x09');
    f.close();
    CHECK_THROWS_AS(open_trace(path), TraceError);
  }
  SUBCASE("unknown flag bits") {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(6);  // flags byte of the first record
    f.put('\x7F');
    f.close();
    auto src = open_trace(path);
    CHECK_THROWS_AS(src->next(), TraceError);
  }
  std::remove(path.c_str());
}

TEST_CASE("file sources skip blanks and comments and rewind cleanly") {
  std::string path = temp_path("memsim_trace_comments.txt");
  {
    std::ofstream out(path);
    out << "# header comment\n\n  \t\n10 R:100\n# mid\n20 W:200\n";
  }
  auto src = open_trace(path);
  auto a = src->next();
  auto b = src->next();
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->bubbles == 10);
  CHECK(b->write_addr == 0x200u);
  CHECK_FALSE(src->next());
  src->rewind();
  auto a2 = src->next();
  REQUIRE(a2);
  CHECK(*a2 == *a);
  std::remove(path.c_str());
}

TEST_CASE("synthetic rpki pacing is exact for integer spacing") {
  SyntheticPattern p;
  p.kind = SyntheticPattern::Kind::random;
  p.rpki = 50;  // one request every 20 instructions
  auto recs = generate_synthetic(p, 100'000);
  uint64_t instr = 0, reqs = 0;
  for (const auto& r : recs) {
    instr += r.instructions();
    reqs += r.read_addr.has_value() + r.write_addr.has_value();
  }
  CHECK(instr == 100'000);
  CHECK(reqs == 5'000);
  for (const auto& r : recs) CHECK(r.bubbles == 19);
}

TEST_CASE("synthetic addresses stay inside the footprint") {
  for (auto kind : {SyntheticPattern::Kind::stream, SyntheticPattern::Kind::random,
                    SyntheticPattern::Kind::pointer_chase,
                    SyntheticPattern::Kind::bursty}) {
    SyntheticPattern p;
    p.kind = kind;
    p.footprint_bytes = 1 << 20;
    p.base_addr = 1ull << 32;
    auto recs = generate_synthetic(p, 50'000);
    CHECK(!recs.empty());
    for (const auto& r : recs) {
      if (r.read_addr) {
        CHECK(*r.read_addr >= p.base_addr);
        CHECK(*r.read_addr < p.base_addr + p.footprint_bytes);
      }
    }
  }
}

TEST_CASE("stream pattern strides and wraps") {
  SyntheticPattern p;
  p.kind = SyntheticPattern::Kind::stream;
  p.rpki = 1000;  // every record is a request with no bubbles
  p.stride_bytes = 128;
  p.footprint_bytes = 512;
  auto recs = generate_synthetic(p, 6);
  REQUIRE(recs.size() == 6);
  std::vector<uint64_t> want = {0, 128, 256, 384, 0, 128};
  for (size_t i = 0; i < want.size(); ++i) CHECK(*recs[i].read_addr == want[i]);
}

TEST_CASE("pointer chase walks one full cycle before repeating") {
  SyntheticPattern p;
  p.kind = SyntheticPattern::Kind::pointer_chase;
  p.footprint_bytes = 64 * 64;  // 64 lines
  p.rpki = 1000;
  auto recs = generate_synthetic(p, 128);
  REQUIRE(recs.size() == 128);
  std::set<uint64_t> seen;
  for (int i = 0; i < 64; ++i) seen.insert(*recs[i].read_addr);
  CHECK(seen.size() == 64);  // every line visited exactly once per cycle
  for (int i = 0; i < 64; ++i) CHECK(*recs[i].read_addr == *recs[i + 64].read_addr);
}

TEST_CASE("bursty pattern alternates request runs with bubble gaps") {
  SyntheticPattern p;
  p.kind = SyntheticPattern::Kind::bursty;
  p.rpki = 50;
  p.burst_length = 8;
  auto recs = generate_synthetic(p, 10'000);
  // Expected shape: 8 zero-bubble reads, then one gap record of 152 bubbles.
  REQUIRE(recs.size() >= 18);
  for (int i = 0; i < 8; ++i) {
    CHECK(recs[i].bubbles == 0);
    CHECK(recs[i].read_addr.has_value());
  }
  CHECK(recs[8].bubbles == 152);
  CHECK_FALSE(recs[8].read_addr.has_value());
  CHECK(recs[9].bubbles == 0);
  CHECK(recs[9].read_addr.has_value());
}

TEST_CASE("synthetic sources replay identically after rewind") {
  for (auto kind : {SyntheticPattern::Kind::random, SyntheticPattern::Kind::bursty,
                    SyntheticPattern::Kind::pointer_chase}) {
    SyntheticPattern p;
    p.kind = kind;
    p.seed = 42;
    SyntheticSource src(p, 20'000);
    std::vector<TraceRecord> a, b;
    while (auto r = src.next()) a.push_back(*r);
    src.rewind();
    while (auto r = src.next()) b.push_back(*r);
    CHECK(a == b);
    CHECK(!a.empty());
  }
}

TEST_CASE("random seeds decorrelate the address sequence") {
  SyntheticPattern p1, p2;
  p1.seed = 1;
  p2.seed = 2;
  auto a = generate_synthetic(p1, 40'000);
  auto b = generate_synthetic(p2, 40'000);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].read_addr != b[i].read_addr) differs = true;
  CHECK(differs);
}

TEST_CASE("pattern spec strings parse with sizes and reject junk") {
  SyntheticPattern p = parse_pattern_spec(
      "kind=stream,stride=128,footprint=2MiB,rpki=25,seed=9,base=0x1000");
  CHECK(p.kind == SyntheticPattern::Kind::stream);
  CHECK(p.stride_bytes == 128);
  CHECK(p.footprint_bytes == 2ull << 20);
  CHECK(p.rpki == 25);
  CHECK(p.seed == 9);
  CHECK(p.base_addr == 0x1000u);

  CHECK(parse_pattern_spec("kind=bursty,burst=16,gap=100").burst_length == 16);
  CHECK(parse_pattern_spec("footprint=64KiB").footprint_bytes == 64ull << 10);
  CHECK(parse_pattern_spec("footprint=1GiB").footprint_bytes == 1ull << 30);

  CHECK_THROWS_AS(parse_pattern_spec("kind=banana"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("rpki=0"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("rpki=2000"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("footprint=3QiB"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("stride=abc"), ConfigError);
  CHECK_THROWS_AS(parse_pattern_spec("footprint=32"), ConfigError);
}

TEST_CASE("missing trace files raise trace errors") {
  CHECK_THROWS_AS(open_trace("/nonexistent/trace.txt"), TraceError);
  CHECK_THROWS_AS(read_trace("/nonexistent/trace.bin"), TraceError);
}
