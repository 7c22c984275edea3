#pragma once

#include <string>
#include <vector>

#include "memsim/command_log.h"
#include "memsim/dram_spec.h"

namespace memsim {

struct AuditIssue {
  size_t log_index = 0;
  std::string what;
};

// Independent legality check of a command log against the timing set: walks
// the log with its own bank state and flags protocol violations (commands to
// the wrong row state) and every timing window the scheduler must honor.
// An empty result means the schedule was legal.
std::vector<AuditIssue> audit_command_log(const std::vector<CommandRecord>& log,
                                          const DramTypeSpec& spec);

}  // namespace memsim
