#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace memsim {

// All timestamps and latencies are integer picoseconds on one shared timebase.
// Table latencies have 0.1 ns resolution, so picoseconds represent them exactly.
using ps_t = int64_t;
constexpr ps_t kNeverPs = std::numeric_limits<ps_t>::max() / 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline int log2_exact(uint64_t v) {
  int n = 0;
  while (v > 1) {
    v >>= 1;
    ++n;
  }
  return n;
}

inline int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

// FNV-1a, used to stamp reports with a digest of the resolved configuration.
inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(uint64_t v) {
  static const char* digits = "0123456789ABCDEF";
  if (v == 0) return "0";
  char buf[16];
  int n = 0;
  while (v) {
    buf[n++] = digits[v & 0xF];
    v >>= 4;
  }
  std::string out;
  while (n) out.push_back(buf[--n]);
  return out;
}

}  // namespace memsim
