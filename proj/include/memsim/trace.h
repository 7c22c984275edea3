#pragma once

#include <cstdio>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "memsim/common.h"

namespace memsim {

// One unit of replayed work: a run of non-memory instructions followed by at
// most one read and one write. A record with no fields at all is invalid.
struct TraceRecord {
  uint64_t bubbles = 0;
  std::optional<uint64_t> read_addr;
  std::optional<uint64_t> write_addr;

  uint64_t instructions() const {
    return bubbles + (read_addr ? 1 : 0) + (write_addr ? 1 : 0);
  }
  bool operator==(const TraceRecord&) const = default;
};

// Text form: "<bubbles> [R:<hex>] [W:<hex>]", '#' starts a comment.
TraceRecord parse_trace_record(const std::string& line, int lineno = 0);
std::string format_trace_record(const TraceRecord& rec);

// Binary form: "DLTR" magic, version byte, then per record a varint bubble
// count, a flag byte (bit0 read, bit1 write), and little-endian 64-bit
// addresses for the flags that are set.
inline constexpr char kTraceMagic[4] = {'D', 'L', 'T', 'R'};
inline constexpr uint8_t kTraceVersion = 1;

class TraceSource {
 public:
  virtual ~TraceSource() = default;
  virtual std::optional<TraceRecord> next() = 0;
  virtual void rewind() = 0;
};

// Replays a trace file without materializing it; sniffs the magic to pick
// the text or binary decoder.
std::unique_ptr<TraceSource> open_trace(const std::string& path);

class VectorTraceSource : public TraceSource {
 public:
  explicit VectorTraceSource(std::vector<TraceRecord> recs)
      : recs_(std::move(recs)) {}
  std::optional<TraceRecord> next() override {
    if (pos_ >= recs_.size()) return std::nullopt;
    return recs_[pos_++];
  }
  void rewind() override { pos_ = 0; }

 private:
  std::vector<TraceRecord> recs_;
  size_t pos_ = 0;
};

void write_text_trace(const std::string& path, const std::vector<TraceRecord>& recs);
void write_binary_trace(const std::string& path, const std::vector<TraceRecord>& recs);
std::vector<TraceRecord> read_trace(const std::string& path);

struct SyntheticPattern {
  enum class Kind { stream, random, pointer_chase, bursty };
  Kind kind = Kind::random;
  uint64_t footprint_bytes = 16ull << 20;
  double rpki = 50.0;          // memory records per thousand instructions
  int stride_bytes = 64;       // stream only
  int burst_length = 8;        // bursty only
  uint64_t inter_burst_gap = 0;  // bursty; derived from rpki when left 0
  uint64_t seed = 1;
  uint64_t base_addr = 0;
};

SyntheticPattern::Kind parse_pattern_kind(const std::string& s);
const char* to_string(SyntheticPattern::Kind k);

// "kind=stream,stride=64,footprint=16MiB,rpki=50,seed=3" etc.
SyntheticPattern parse_pattern_spec(const std::string& text);

// Deterministic lazy generator; rewinding replays the identical sequence.
class SyntheticSource : public TraceSource {
 public:
  SyntheticSource(const SyntheticPattern& pat, uint64_t total_instructions);
  std::optional<TraceRecord> next() override;
  void rewind() override;

 private:
  uint64_t pick_address();

  SyntheticPattern pat_;
  uint64_t total_instructions_;
  uint64_t lines_;
  uint64_t emitted_instructions_ = 0;
  uint64_t emitted_requests_ = 0;
  uint64_t stream_pos_ = 0;
  uint64_t chase_pos_ = 0;
  int burst_left_ = 0;
  uint64_t gap_ = 0;
  bool in_gap_ = false;
  std::mt19937_64 rng_;
  std::vector<uint32_t> chase_perm_;
};

std::vector<TraceRecord> generate_synthetic(const SyntheticPattern& pat,
                                            uint64_t total_instructions);

}  // namespace memsim
