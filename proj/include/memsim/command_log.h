#pragma once

#include <iosfwd>
#include <vector>

#include "memsim/common.h"
#include "memsim/dram_spec.h"

namespace memsim {

enum class CommandKind { activate, read, write, precharge };

inline const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::activate: return "ACT";
    case CommandKind::read: return "RD";
    case CommandKind::write: return "WR";
    case CommandKind::precharge: return "PRE";
  }
  return "?";
}

struct CommandRecord {
  ps_t issue_ps = 0;
  int channel = 0;  // bus domain; vault index for stacked parts
  CommandKind kind = CommandKind::activate;
  DramCoordinates coords;
  uint64_t request_id = 0;
};

// One line per issued DRAM command, in issue order.
void write_command_log(std::ostream& out, const std::vector<CommandRecord>& log);
std::vector<CommandRecord> parse_command_log(std::istream& in);

}  // namespace memsim
