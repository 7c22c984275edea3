#include "memsim/audit.h"

#include <map>

namespace memsim {

namespace {

struct BankWalk {
  int64_t open_row = -1;
  ps_t last_act = -kNeverPs;
  ps_t last_pre = -kNeverPs;
  ps_t last_cas_end = -kNeverPs;  // end of the data window of the last CAS
};

struct BusWalk {
  ps_t last_cmd = -kNeverPs;
  ps_t last_cas = -kNeverPs;
  std::map<int, ps_t> last_group_cas;
};

}  // namespace

std::vector<AuditIssue> audit_command_log(const std::vector<CommandRecord>& log,
                                          const DramTypeSpec& spec) {
  TimingSet t = derive_timings(spec);
  std::vector<AuditIssue> issues;
  std::map<std::pair<int, int>, BankWalk> banks;  // (bus, bank-in-bus)
  std::map<int, BusWalk> buses;
  bool grouped = spec.bank_groups > 1;

  auto flag = [&](size_t i, const std::string& what) {
    issues.push_back({i, what});
  };

  for (size_t i = 0; i < log.size(); ++i) {
    const CommandRecord& c = log[i];
    int bus = c.channel;
    int bank_in_bus = spec.stacked()
                          ? c.coords.bank
                          : c.coords.rank * spec.banks_per_rank + c.coords.bank;
    BankWalk& b = banks[{bus, bank_in_bus}];
    BusWalk& w = buses[bus];

    if (i > 0 && c.issue_ps < log[i - 1].issue_ps &&
        log[i - 1].channel == c.channel)
      flag(i, "commands on one bus out of time order");
    if (w.last_cmd > -kNeverPs && c.issue_ps - w.last_cmd < t.clock_ps)
      flag(i, "two commands within one clock on the command bus");
    w.last_cmd = c.issue_ps;

    switch (c.kind) {
      case CommandKind::activate:
        if (b.open_row >= 0) flag(i, "activate while a row is open");
        if (c.issue_ps - b.last_pre < t.trp_ps && b.last_pre > -kNeverPs)
          flag(i, "activate inside the precharge window (tRP)");
        b.open_row = c.coords.row;
        b.last_act = c.issue_ps;
        break;
      case CommandKind::precharge:
        if (b.open_row < 0) flag(i, "precharge of an already closed bank");
        if (c.issue_ps - b.last_act < t.tras_ps)
          flag(i, "precharge inside the activate window (tRAS)");
        if (c.issue_ps < b.last_cas_end)
          flag(i, "precharge while column data is still in flight");
        b.open_row = -1;
        b.last_pre = c.issue_ps;
        break;
      case CommandKind::read:
      case CommandKind::write: {
        if (b.open_row < 0) flag(i, "column command to a closed bank");
        else if (b.open_row != c.coords.row)
          flag(i, "column command to a row that is not open");
        if (c.issue_ps - b.last_act < t.trcd_ps)
          flag(i, "column command inside the activate-to-column window (tRCD)");
        if (w.last_cas > -kNeverPs &&
            c.issue_ps - w.last_cas < t.tccd_other_group_ps)
          flag(i, "column commands closer than one burst on the data bus");
        if (grouped) {
          int g = c.coords.rank * spec.bank_groups + c.coords.bank_group;
          auto it = w.last_group_cas.find(g);
          if (it != w.last_group_cas.end() &&
              c.issue_ps - it->second < t.tccd_same_group_ps)
            flag(i, "same-group column commands closer than tCCD");
          w.last_group_cas[g] = c.issue_ps;
        }
        w.last_cas = c.issue_ps;
        b.last_cas_end = c.issue_ps +
                         (c.kind == CommandKind::read
                              ? t.tcas_ps + t.burst_ps
                              : t.burst_ps);
        break;
      }
    }
  }
  return issues;
}

}  // namespace memsim
