#pragma once

#include "memsim/common.h"
#include "memsim/dram_spec.h"

namespace memsim {

// Assigned once, from the first command the scheduler issues on the
// request's behalf: CAS means the row was already open, an activate means
// the bank was closed, a precharge means another row had to be evicted.
enum class LocalityClass { unclassified, hit, miss, conflict };

inline const char* to_string(LocalityClass c) {
  switch (c) {
    case LocalityClass::unclassified: return "unclassified";
    case LocalityClass::hit: return "hit";
    case LocalityClass::miss: return "miss";
    case LocalityClass::conflict: return "conflict";
  }
  return "?";
}

struct MemoryRequest {
  uint64_t id = 0;
  int core = -1;
  bool is_write = false;
  uint64_t paddr = 0;
  DramCoordinates coords;
  ps_t arrival_ps = 0;        // presented to the memory system
  ps_t first_command_ps = -1; // first command issued for it
  ps_t dram_complete_ps = -1; // data leaves/enters the array
  ps_t completion_ps = -1;    // visible to the requester (after any link)
  LocalityClass cls = LocalityClass::unclassified;

  ps_t queuing_ps() const { return first_command_ps - arrival_ps; }
  ps_t service_ps() const { return completion_ps - first_command_ps; }
};

}  // namespace memsim
