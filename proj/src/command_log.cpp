#include "memsim/command_log.h"

#include <istream>
#include <ostream>
#include <sstream>

namespace memsim {

void write_command_log(std::ostream& out, const std::vector<CommandRecord>& log) {
  for (const auto& c : log) {
    out << c.issue_ps << ' ' << c.channel << ' ' << to_string(c.kind) << ' '
        << c.coords.rank << ' ' << c.coords.bank_group << ' ' << c.coords.bank
        << ' ' << c.coords.vault << ' ' << c.coords.row << ' ' << c.coords.column
        << ' ' << c.request_id << '\n';
  }
}

std::vector<CommandRecord> parse_command_log(std::istream& in) {
  std::vector<CommandRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    CommandRecord c;
    std::string kind;
    if (!(ss >> c.issue_ps >> c.channel >> kind >> c.coords.rank >>
          c.coords.bank_group >> c.coords.bank >> c.coords.vault >>
          c.coords.row >> c.coords.column >> c.request_id))
      throw ConfigError("command log line " + std::to_string(lineno) + " malformed");
    // The channel column doubles as the bus domain; stacked parts key banks
    // by vault and ignore it.
    c.coords.channel = c.channel;
    if (kind == "ACT") c.kind = CommandKind::activate;
    else if (kind == "RD") c.kind = CommandKind::read;
    else if (kind == "WR") c.kind = CommandKind::write;
    else if (kind == "PRE") c.kind = CommandKind::precharge;
    else throw ConfigError("command log line " + std::to_string(lineno) +
                           ": unknown command '" + kind + "'");
    out.push_back(c);
  }
  return out;
}

}  // namespace memsim
