#include "rezone/cost_model.hpp"

#include <cstdio>

namespace rezone {

double event_cost(const TraceEvent& ev, const CostWeights& w) {
  switch (ev.kind) {
    case EventKind::Flush:
      return ev.count * w.cache_line_flush;
    case EventKind::Tlbi:
      return w.tlb_invalidate;
    case EventKind::MqReply:
      return w.mq_roundtrip;  // one per request/reply pair
    case EventKind::Mem:
      return (ev.verdict == MemVerdict::Bypass && ev.is_fetch) ? w.uncached_fetch : 0.0;
    case EventKind::PpcConfig:
      return ev.flag ? w.ppc_config_write : 0.0;
    case EventKind::Ctx:
      return w.context_save_restore;
    case EventKind::Work:
      return ev.count * kWorkUnitCost;
    default:
      return 0.0;
  }
}

CostBreakdown account(const TraceLog& trace, const CostWeights& w) {
  CostBreakdown out;
  for (const TraceEvent& ev : trace.events) {
    double c = event_cost(ev, w);
    if (c != 0.0) {
      out.by_phase[ev.phase] += c;
      out.total += c;
    }
  }
  return out;
}

namespace {

bool entry_phase(Phase p) {
  return p == Phase::SyncHalt || p == Phase::Flush || p == Phase::Tlbi ||
         p == Phase::Unlock || p == Phase::Reconf || p == Phase::MmuOff;
}

bool exit_phase(Phase p) {
  return p == Phase::ExitInvalidate || p == Phase::Unlock || p == Phase::ReconfBack ||
         p == Phase::Relock || p == Phase::MmuOn || p == Phase::Resume;
}

}  // namespace

SwitchCosts switch_costs(const TraceLog& trace, const CostWeights& w) {
  SwitchCosts out;
  bool in_entry = false, in_exit = false;
  double acc = 0.0;
  for (const TraceEvent& ev : trace.events) {
    if (ev.kind == EventKind::PhaseEvt) {
      if (ev.phase == Phase::SyncHalt) {
        in_entry = true;
        in_exit = false;
        acc = 0.0;
      } else if (ev.phase == Phase::InZone && in_entry) {
        out.entries.push_back(acc);
        in_entry = false;
      } else if (ev.phase == Phase::ExitInvalidate) {
        in_exit = true;
        in_entry = false;
        acc = 0.0;
      } else if (ev.phase == Phase::Idle && in_exit) {
        out.exits.push_back(acc);
        in_exit = false;
      }
      continue;
    }
    if ((in_entry && entry_phase(ev.phase)) || (in_exit && exit_phase(ev.phase))) {
      acc += event_cost(ev, w);
    }
  }
  return out;
}

double ComparisonTable::total(const std::string& config) const {
  for (const Row& r : rows) {
    if (r.config == config) return r.total;
  }
  return 0.0;
}

std::string ComparisonTable::to_text() const {
  std::string out = "config | total | overhead_vs_norz\n";
  char buf[96];
  for (const Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s | %.6g | %.6g\n", r.config.c_str(), r.total,
                  r.overhead_ratio);
    out += buf;
  }
  return out;
}

namespace {

Sim workload_sim(const Workload& wl, const SimConfig& base, SecurityMode mode) {
  SimConfig cfg = base;
  cfg.mode = mode;
  std::vector<ZoneManifest> zones;
  ZoneManifest z1;
  z1.zone_id = 1;
  z1.smc_first = 100;
  z1.smc_last = 200;
  ZoneManifest z2;
  z2.zone_id = 2;
  z2.smc_first = 200;
  z2.smc_last = 300;
  zones = {z1, z2};

  Sim sim = Sim::build(cfg, zones);
  // Each zone's trusted OS performs the per-call work declared for it.
  uint64_t units_by_zone[3] = {0, 1, 1};
  for (const Workload::Call& c : wl.calls) {
    if (c.zone >= 1 && c.zone <= 2) units_by_zone[c.zone] = c.units;
  }
  sim.set_zone_program(1, {Action::work(units_by_zone[1]), Action::zone_exit(0)});
  sim.set_zone_program(2, {Action::work(units_by_zone[2]), Action::zone_exit(0)});

  Program driver;
  for (const Workload::Call& c : wl.calls) {
    driver.push_back(Action::smc(c.zone == 2 ? 200 : 100));
  }
  sim.set_normal_program(0, driver);
  return sim;
}

double runtime_total(const TraceLog& trace, const CostWeights& w) {
  CostBreakdown b = account(trace, w);
  return b.total - b.phase(Phase::Boot);
}

}  // namespace

ComparisonTable compare(const Workload& workload, const CostWeights& w,
                        const SimConfig& base_config) {
  Sim norz = workload_sim(workload, base_config, SecurityMode::NoRz);
  norz.boot();
  run_round_robin(norz);
  double norz_total = runtime_total(norz.machine.trace, w);

  Sim rz = workload_sim(workload, base_config, SecurityMode::Rz);
  rz.boot();
  run_round_robin(rz);
  double rz_base = runtime_total(rz.machine.trace, w);

  // A normal-world IRQ during zone execution preempts the trusted OS under
  // RZ: one extra exit+entry round trip each. The no-preemption deployment
  // simply keeps the zone running.
  double per_switch = 0.0;
  SwitchCosts sc = switch_costs(rz.machine.trace, w);
  if (!sc.entries.empty() && !sc.exits.empty()) {
    double entry_avg = 0.0, exit_avg = 0.0;
    for (double c : sc.entries) entry_avg += c;
    for (double c : sc.exits) exit_avg += c;
    per_switch = entry_avg / sc.entries.size() + exit_avg / sc.exits.size();
  }
  double rz_total = rz_base + workload.irqs_during_zone * per_switch;
  double rz_noirq_total = rz_base;

  ComparisonTable table;
  auto ratio = [&](double v) { return norz_total > 0 ? v / norz_total : 0.0; };
  table.rows.push_back({"norz", norz_total, 1.0});
  table.rows.push_back({"rz", rz_total, ratio(rz_total)});
  table.rows.push_back({"rz-noirq", rz_noirq_total, ratio(rz_noirq_total)});
  return table;
}

}  // namespace rezone
