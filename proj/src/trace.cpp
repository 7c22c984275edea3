#include "memsim/trace.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace memsim {

namespace {

std::string where(int lineno) {
  return lineno > 0 ? "line " + std::to_string(lineno) + ": " : "";
}

uint64_t parse_hex_addr(const std::string& tok, int lineno) {
  std::string body = tok;
  if (body.size() > 2 && (body[0] == '0') && (body[1] == 'x' || body[1] == 'X'))
    body = body.substr(2);
  if (body.empty()) throw TraceError(where(lineno) + "empty address");
  uint64_t v = 0;
  for (char c : body) {
    int d;
    if (c >= '0' && c <= '9') d = c - '0';
    else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
    else throw TraceError(where(lineno) + "bad hex digit in '" + tok + "'");
    if (v >> 60) throw TraceError(where(lineno) + "address overflow in '" + tok + "'");
    v = (v << 4) | (uint64_t)d;
  }
  return v;
}

}  // namespace

TraceRecord parse_trace_record(const std::string& raw, int lineno) {
  std::string line = raw;
  if (size_t hash = line.find('#'); hash != std::string::npos)
    line = line.substr(0, hash);
  std::istringstream ss(line);
  std::vector<std::string> toks;
  for (std::string t; ss >> t;) toks.push_back(t);
  if (toks.empty()) throw TraceError(where(lineno) + "empty record");

  const std::string& head = toks[0];
  if (!head.empty() && head[0] == '-')
    throw TraceError(where(lineno) + "negative bubble count '" + head + "'");
  if (head.empty() || !std::all_of(head.begin(), head.end(),
                                   [](char c) { return std::isdigit((unsigned char)c); }))
    throw TraceError(where(lineno) + "bad bubble count '" + head + "'");

  TraceRecord rec;
  rec.bubbles = std::stoull(head);
  for (size_t i = 1; i < toks.size(); ++i) {
    const std::string& t = toks[i];
    if (t.size() > 2 && (t[0] == 'R' || t[0] == 'r') && t[1] == ':') {
      if (rec.read_addr) throw TraceError(where(lineno) + "duplicate read field");
      rec.read_addr = parse_hex_addr(t.substr(2), lineno);
    } else if (t.size() > 2 && (t[0] == 'W' || t[0] == 'w') && t[1] == ':') {
      if (rec.write_addr) throw TraceError(where(lineno) + "duplicate write field");
      rec.write_addr = parse_hex_addr(t.substr(2), lineno);
    } else {
      throw TraceError(where(lineno) + "unrecognized token '" + t + "'");
    }
  }
  if (rec.instructions() == 0)
    throw TraceError(where(lineno) + "record carries no instructions");
  return rec;
}

std::string format_trace_record(const TraceRecord& rec) {
  std::string out = std::to_string(rec.bubbles);
  if (rec.read_addr) out += " R:0x" + to_hex(*rec.read_addr);
  if (rec.write_addr) out += " W:0x" + to_hex(*rec.write_addr);
  return out;
}

namespace {

class TextFileSource : public TraceSource {
 public:
  explicit TextFileSource(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw TraceError("cannot open trace '" + path + "'");
  }
  std::optional<TraceRecord> next() override {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      std::string probe = line;
      if (size_t hash = probe.find('#'); hash != std::string::npos)
        probe = probe.substr(0, hash);
      if (probe.find_first_not_of(" \t\r") == std::string::npos) continue;
      return parse_trace_record(line, lineno_);
    }
    return std::nullopt;
  }
  void rewind() override {
    in_.clear();
    in_.seekg(0);
    lineno_ = 0;
  }

 private:
  std::string path_;
  std::ifstream in_;
  int lineno_ = 0;
};

class BinaryFileSource : public TraceSource {
 public:
  explicit BinaryFileSource(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw TraceError("cannot open trace '" + path + "'");
    check_header();
  }
  std::optional<TraceRecord> next() override {
    int first = in_.get();
    if (first == EOF) return std::nullopt;
    uint64_t bubbles = 0;
    int shift = 0;
    int byte = first;
    while (true) {
      bubbles |= (uint64_t)(byte & 0x7F) << shift;
      if (!(byte & 0x80)) break;
      shift += 7;
      if (shift > 63) throw TraceError(path_ + ": runaway varint");
      byte = in_.get();
      if (byte == EOF) throw TraceError(path_ + ": truncated varint");
    }
    int flags = in_.get();
    if (flags == EOF) throw TraceError(path_ + ": truncated record");
    if (flags & ~0x3) throw TraceError(path_ + ": unknown flag bits");
    TraceRecord rec;
    rec.bubbles = bubbles;
    if (flags & 0x1) rec.read_addr = read_u64();
    if (flags & 0x2) rec.write_addr = read_u64();
    if (rec.instructions() == 0) throw TraceError(path_ + ": empty record");
    return rec;
  }
  void rewind() override {
    in_.clear();
    in_.seekg(5);
  }

 private:
  void check_header() {
    char magic[4];
    in_.read(magic, 4);
    int ver = in_.get();
    if (!in_ || std::memcmp(magic, kTraceMagic, 4) != 0)
      throw TraceError(path_ + ": not a binary trace");
    if (ver != kTraceVersion)
      throw TraceError(path_ + ": unsupported trace version " + std::to_string(ver));
  }
  uint64_t read_u64() {
    unsigned char b[8];
    in_.read(reinterpret_cast<char*>(b), 8);
    if (!in_) throw TraceError(path_ + ": truncated address");
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  std::string path_;
  std::ifstream in_;
};

}  // namespace

std::unique_ptr<TraceSource> open_trace(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw TraceError("cannot open trace '" + path + "'");
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  if (probe.gcount() == 4 && std::memcmp(magic, kTraceMagic, 4) == 0)
    return std::make_unique<BinaryFileSource>(path);
  return std::make_unique<TextFileSource>(path);
}

void write_text_trace(const std::string& path, const std::vector<TraceRecord>& recs) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write trace '" + path + "'");
  for (const auto& r : recs) out << format_trace_record(r) << '\n';
}

void write_binary_trace(const std::string& path, const std::vector<TraceRecord>& recs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write trace '" + path + "'");
  out.write(kTraceMagic, 4);
  out.put((char)kTraceVersion);
  for (const auto& r : recs) {
    uint64_t v = r.bubbles;
    do {
      uint8_t b = v & 0x7F;
      v >>= 7;
      if (v) b |= 0x80;
      out.put((char)b);
    } while (v);
    uint8_t flags = (r.read_addr ? 1 : 0) | (r.write_addr ? 2 : 0);
    out.put((char)flags);
    auto put_u64 = [&](uint64_t a) {
      for (int i = 0; i < 8; ++i) out.put((char)((a >> (8 * i)) & 0xFF));
    };
    if (r.read_addr) put_u64(*r.read_addr);
    if (r.write_addr) put_u64(*r.write_addr);
  }
}

std::vector<TraceRecord> read_trace(const std::string& path) {
  auto src = open_trace(path);
  std::vector<TraceRecord> out;
  while (auto r = src->next()) out.push_back(*r);
  return out;
}

SyntheticPattern::Kind parse_pattern_kind(const std::string& s) {
  if (s == "stream") return SyntheticPattern::Kind::stream;
  if (s == "random") return SyntheticPattern::Kind::random;
  if (s == "pointer-chase" || s == "pointer_chase")
    return SyntheticPattern::Kind::pointer_chase;
  if (s == "bursty") return SyntheticPattern::Kind::bursty;
  throw ConfigError("unknown pattern kind '" + s + "'");
}

const char* to_string(SyntheticPattern::Kind k) {
  switch (k) {
    case SyntheticPattern::Kind::stream: return "stream";
    case SyntheticPattern::Kind::random: return "random";
    case SyntheticPattern::Kind::pointer_chase: return "pointer-chase";
    case SyntheticPattern::Kind::bursty: return "bursty";
  }
  return "?";
}

namespace {

uint64_t parse_size(const std::string& v) {
  size_t pos = 0;
  double num = std::stod(v, &pos);
  std::string suffix = v.substr(pos);
  uint64_t mult = 1;
  if (suffix == "" || suffix == "B") mult = 1;
  else if (suffix == "K" || suffix == "KiB") mult = 1ull << 10;
  else if (suffix == "M" || suffix == "MiB") mult = 1ull << 20;
  else if (suffix == "G" || suffix == "GiB") mult = 1ull << 30;
  else throw ConfigError("bad size suffix '" + suffix + "'");
  return (uint64_t)std::llround(num * (double)mult);
}

}  // namespace

SyntheticPattern parse_pattern_spec(const std::string& text) {
  SyntheticPattern p;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("pattern spec item '" + item + "' is not key=value");
    std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    try {
      if (key == "kind") p.kind = parse_pattern_kind(val);
      else if (key == "footprint") p.footprint_bytes = parse_size(val);
      else if (key == "rpki") p.rpki = std::stod(val);
      else if (key == "stride") p.stride_bytes = (int)parse_size(val);
      else if (key == "burst") p.burst_length = std::stoi(val);
      else if (key == "gap") p.inter_burst_gap = std::stoull(val);
      else if (key == "seed") p.seed = std::stoull(val);
      else if (key == "base") p.base_addr = std::stoull(val, nullptr, 0);
      else throw ConfigError("unknown pattern key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("bad pattern value '" + val + "' for " + key);
    }
  }
  if (p.footprint_bytes < 64) throw ConfigError("pattern footprint below one line");
  if (p.rpki <= 0 || p.rpki > 1000) throw ConfigError("pattern rpki out of (0, 1000]");
  if (p.stride_bytes <= 0) throw ConfigError("pattern stride must be positive");
  if (p.burst_length <= 0) throw ConfigError("pattern burst length must be positive");
  return p;
}

SyntheticSource::SyntheticSource(const SyntheticPattern& pat,
                                 uint64_t total_instructions)
    : pat_(pat), total_instructions_(total_instructions) {
  lines_ = pat_.footprint_bytes / 64;
  if (lines_ == 0) throw ConfigError("pattern footprint below one line");
  if (pat_.kind == SyntheticPattern::Kind::bursty && pat_.inter_burst_gap == 0) {
    // Fill in the gap that realizes the requested request density.
    double per_burst = pat_.burst_length * 1000.0 / pat_.rpki;
    gap_ = (uint64_t)std::llround(std::max(0.0, per_burst - pat_.burst_length));
  } else {
    gap_ = pat_.inter_burst_gap;
  }
  if (pat_.kind == SyntheticPattern::Kind::pointer_chase) {
    if (lines_ > (1ull << 26))
      throw ConfigError("pointer-chase footprint too large to materialize");
    std::vector<uint32_t> order(lines_);
    for (uint64_t i = 0; i < lines_; ++i) order[i] = (uint32_t)i;
    std::mt19937_64 g(pat_.seed);
    std::shuffle(order.begin(), order.end(), g);
    // One cycle through every line so the chase never revisits early.
    chase_perm_.assign(lines_, 0);
    for (uint64_t i = 0; i < lines_; ++i)
      chase_perm_[order[i]] = order[(i + 1) % lines_];
  }
  rewind();
}

void SyntheticSource::rewind() {
  emitted_instructions_ = 0;
  emitted_requests_ = 0;
  stream_pos_ = 0;
  burst_left_ = 0;
  in_gap_ = false;
  rng_.seed(pat_.seed + 0x9E3779B97F4A7C15ull);
  chase_pos_ = pat_.seed % lines_;
}

uint64_t SyntheticSource::pick_address() {
  switch (pat_.kind) {
    case SyntheticPattern::Kind::stream: {
      uint64_t off = (stream_pos_ * (uint64_t)pat_.stride_bytes) % pat_.footprint_bytes;
      ++stream_pos_;
      return pat_.base_addr + off;
    }
    case SyntheticPattern::Kind::pointer_chase:
      chase_pos_ = chase_perm_[chase_pos_];
      return pat_.base_addr + chase_pos_ * 64;
    case SyntheticPattern::Kind::random:
    case SyntheticPattern::Kind::bursty:
      return pat_.base_addr + (rng_() % lines_) * 64;
  }
  return pat_.base_addr;
}

std::optional<TraceRecord> SyntheticSource::next() {
  if (emitted_instructions_ >= total_instructions_) return std::nullopt;
  uint64_t remaining = total_instructions_ - emitted_instructions_;
  TraceRecord rec;

  if (pat_.kind == SyntheticPattern::Kind::bursty) {
    if (burst_left_ == 0 && !in_gap_) {
      burst_left_ = pat_.burst_length;
      in_gap_ = gap_ > 0;
    }
    if (burst_left_ > 0) {
      rec.bubbles = 0;
      rec.read_addr = pick_address();
      --burst_left_;
    } else {
      rec.bubbles = std::min(gap_, remaining);
      in_gap_ = false;
      if (rec.bubbles == 0) return next();
    }
  } else {
    // Spread requests so the cumulative count tracks rpki exactly.
    double per_request = 1000.0 / pat_.rpki;
    uint64_t target = (uint64_t)std::llround((double)(emitted_requests_ + 1) * per_request);
    uint64_t bubbles = target > emitted_instructions_ + 1
                           ? target - emitted_instructions_ - 1
                           : 0;
    rec.bubbles = bubbles;
    rec.read_addr = pick_address();
    ++emitted_requests_;
  }

  if (rec.instructions() > remaining) {
    uint64_t mem = (rec.read_addr ? 1 : 0) + (rec.write_addr ? 1 : 0);
    if (remaining > mem) {
      rec.bubbles = remaining - mem;
    } else if (mem > 0 && remaining >= mem) {
      rec.bubbles = 0;
    } else {
      rec.read_addr.reset();
      rec.write_addr.reset();
      rec.bubbles = remaining;
    }
  }
  emitted_instructions_ += rec.instructions();
  return rec;
}

std::vector<TraceRecord> generate_synthetic(const SyntheticPattern& pat,
                                            uint64_t total_instructions) {
  SyntheticSource src(pat, total_instructions);
  std::vector<TraceRecord> out;
  while (auto r = src.next()) out.push_back(*r);
  return out;
}

}  // namespace memsim
