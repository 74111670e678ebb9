#include "rezone/adversary.hpp"

#include <cstdlib>
#include <deque>
#include <unordered_set>

#include "rezone/errors.hpp"

namespace rezone {

std::string to_string(AttackId id) {
  switch (id) {
    case AttackId::A1_Mapping: return "A1-direct-mapping";
    case AttackId::A2_PpcHijack: return "A2-ppc-hijack";
    case AttackId::A3_CacheLeak: return "A3-cache-leak";
    case AttackId::A4_CodeInject: return "A4-code-inject";
    case AttackId::A5_TcbTamper: return "A5-tcb-tamper";
  }
  return "?";
}

SimConfig default_attack_config() {
  SimConfig cfg;
  cfg.cluster.cores = 2;
  cfg.plant_canaries = true;
  return cfg;
}

namespace {

std::vector<ZoneManifest> two_zones() {
  ZoneManifest z1;
  z1.zone_id = 1;
  z1.smc_first = 100;
  z1.smc_last = 200;
  z1.peripheral_whitelist = {1};
  ZoneManifest z2;
  z2.zone_id = 2;
  z2.smc_first = 200;
  z2.smc_last = 300;
  z2.peripheral_whitelist = {1};
  return {z1, z2};
}

// Attacker-chosen VAs, far away from the trusted OS identity maps.
constexpr uint64_t kEvilVa0 = 0x40000000;

uint64_t canary_pa(const Sim& sim, RegionKind region) {
  return sim.region_base(region) + kCanaryOffset;
}

Program attack_program(AttackId id, const Sim& sim, uint64_t guess_limit) {
  const uint64_t off = kCanaryOffset;
  switch (id) {
    case AttackId::A1_Mapping:
      // The three victim mappings: normal world, secure monitor, another
      // zone. NS chosen to pass the TZASC; only the PPC can stop these.
      return {
          Action::map(kEvilVa0, canary_pa(sim, RegionKind::ree()), true, true),
          Action::read_va(kEvilVa0 + off),
          Action::map(kEvilVa0 + kPageBytes, canary_pa(sim, RegionKind::monitor()),
                      false, true),
          Action::read_va(kEvilVa0 + kPageBytes + off),
          Action::map(kEvilVa0 + 2 * kPageBytes, canary_pa(sim, RegionKind::zone(2)),
                      false, true),
          Action::read_va(kEvilVa0 + 2 * kPageBytes + off),
          Action::zone_exit(1),
      };
    case AttackId::A2_PpcHijack:
      return {
          // Straight reconfiguration attempt against the locked config port.
          Action::ppc_edit(ConfigEdit::set_perm(kClusterDomain, RegionKind::ree(),
                                                Permission::RW)),
          // Then impersonate the trampoline with enumerated token claims.
          Action::guess(guess_limit),
          // If an unlock ever succeeded, prove the escape end to end.
          Action::ppc_edit(ConfigEdit::set_perm(kClusterDomain, RegionKind::ree(),
                                                Permission::RW)),
          Action::map(kEvilVa0, canary_pa(sim, RegionKind::ree()), true, true),
          Action::read_va(kEvilVa0 + off),
          Action::zone_exit(2),
      };
    case AttackId::A3_CacheLeak:
      // Residue probes: the normal world and zone 2 have both touched their
      // canaries. Any hit here bypasses the PPC entirely.
      return {
          Action::map(kEvilVa0, canary_pa(sim, RegionKind::ree()), true, true),
          Action::read_va(kEvilVa0 + off),
          Action::map(kEvilVa0 + kPageBytes, canary_pa(sim, RegionKind::zone(2)),
                      false, true),
          Action::read_va(kEvilVa0 + kPageBytes + off),
          Action::zone_exit(3),
      };
    case AttackId::A4_CodeInject: {
      uint64_t vec = sim.trampoline_vector_pa();
      return {
          Action::map(kEvilVa0, vec, false, true),
          Action::read_va(kEvilVa0),          // fill the vector line (RO read)
          Action::write_va(kEvilVa0, 0xEB11BAD), // poison it in cache
          Action::zone_exit(4),
      };
    }
    case AttackId::A5_TcbTamper:
    default:
      return {Action::zone_exit(5)};
  }
}

void install_attack(Sim& sim, AttackId id, uint64_t guess_limit) {
  sim.set_zone_program(1, attack_program(id, sim, guess_limit), /*honest=*/false);
  sim.set_zone_program(2, {Action::zone_exit(0)});

  switch (id) {
    case AttackId::A3_CacheLeak:
      // Victim passes first: zone 2 touches its canary, the normal world
      // touches the REE canary on the other core.
      sim.set_zone_program(
          2, {Action::read_va(canary_pa(sim, RegionKind::zone(2))), Action::zone_exit(0)});
      sim.set_normal_program(0, {Action::smc(200), Action::smc(100)});
      if (sim.config.cluster.cores > 1) {
        sim.set_normal_program(1, {Action::read(canary_pa(sim, RegionKind::ree()))});
      }
      break;
    case AttackId::A5_TcbTamper:
      sim.pre_boot_patch(RegionKind::monitor(), 0x500, 0xBADF00D);
      sim.set_normal_program(0, {Action::smc(100)});
      break;
    default:
      sim.set_normal_program(0, {Action::smc(100)});
      break;
  }
}

}  // namespace

Sim make_attack_sim(AttackId id, const SimConfig& config, uint64_t token_guess_limit) {
  Sim sim = Sim::build(config, two_zones());
  install_attack(sim, id, token_guess_limit);
  return sim;
}

AttackOutcome run_attack(AttackId id, const SimConfig& config, uint64_t schedule_seed) {
  AttackOutcome out;
  Sim sim = make_attack_sim(id, config, 256);
  try {
    sim.boot();
  } catch (const SimError& e) {
    if (e.code() == ErrorCode::BootRefused) {
      out.blocked = true;
      out.note = "secure boot refused the tampered image";
      return out;
    }
    throw;
  }
  if (id == AttackId::A5_TcbTamper) {
    // The tampered image was not caught: that is a success for the attacker.
    out.blocked = false;
    out.note = "tampered image booted";
    return out;
  }

  PpcState boot_ppc = sim.machine.ppc;
  run_fixed(sim, schedule_seed);

  bool ppc_intact = sim.machine.ppc.perms == boot_ppc.perms &&
                    sim.machine.ppc.bindings == boot_ppc.bindings &&
                    sim.machine.ppc.locked == boot_ppc.locked;
  bool image_intact =
      hash_region(sim.machine, RegionKind::trampoline()) == sim.manifest.trampoline_hash;

  out.violations = sim.violations;
  out.guess_attempts = sim.ctx[0].mon.guess_count;
  out.blocked = sim.violations.empty() && ppc_intact && image_intact;
  if (!out.blocked) {
    out.note = sim.violations.empty()
                   ? (ppc_intact ? "trampoline image modified" : "PPC configuration changed")
                   : sim.violations.front().detail;
  }
  return out;
}

uint64_t token_guess_attempts(int token_bits, uint64_t boot_seed) {
  SimConfig cfg = default_attack_config();
  cfg.token_bits = token_bits;
  cfg.boot_seed = boot_seed;
  uint64_t limit = 1ULL << token_bits;
  Sim sim = make_attack_sim(AttackId::A2_PpcHijack, cfg, limit);
  sim.boot();
  run_fixed(sim, boot_seed ^ 0x5C4ED0135ULL, 64ULL * limit);
  return sim.ctx[0].mon.guess_count;
}

std::string ExplorationReport::to_text() const {
  std::string out;
  out += "states_visited=" + std::to_string(states_visited);
  out += " branches=" + std::to_string(branches);
  out += " depth_reached=" + std::to_string(depth_reached);
  out += " deadlock=" + std::string(deadlock_found ? "1" : "0");
  out += " budget_exceeded=" + std::string(budget_exceeded ? "1" : "0");
  out += "\nphases:";
  for (Phase p : phase_coverage) out += " " + to_string(p);
  out += "\n";
  for (const Violation& v : violations) {
    out += "violation " + to_string(v.kind) + ": " + v.detail + "\n";
  }
  if (!witness_schedule.empty()) {
    out += "witness_schedule:";
    for (int c : witness_schedule) out += " " + std::to_string(c);
    out += "\n";
  }
  return out;
}

ExplorationReport explore(const Sim& initial, int depth, uint64_t budget,
                          bool stop_on_violation) {
  if (budget == 0) {
    if (const char* env = std::getenv("REZONE_SIM_BUDGET")) {
      budget = std::strtoull(env, nullptr, 10);
    }
    if (budget == 0) budget = 2'000'000;
  }

  ExplorationReport report;
  struct Node {
    Sim sim;
    int depth;
    std::vector<int> schedule;
  };
  std::deque<Node> queue;
  std::unordered_set<std::string> visited;

  Node root{initial, 0, {}};
  root.sim.machine.trace.retain = false;
  visited.insert(root.sim.state_key());
  queue.push_back(std::move(root));

  auto note_violations = [&](const Sim& sim, size_t first, const std::vector<int>& sched) {
    for (size_t i = first; i < sim.violations.size(); ++i) {
      bool seen = false;
      for (const Violation& v : report.violations) {
        if (v.kind == sim.violations[i].kind) seen = true;
      }
      if (!seen) {
        report.violations.push_back(sim.violations[i]);
        if (report.witness_schedule.empty()) report.witness_schedule = sched;
      }
    }
  };

  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    report.depth_reached = std::max(report.depth_reached, node.depth);
    if (node.depth >= depth) continue;

    std::vector<int> actors = node.sim.runnable_actors();
    if (actors.empty()) {
      if (!node.sim.all_done()) {
        report.deadlock_found = true;
        if (report.witness_schedule.empty()) report.witness_schedule = node.schedule;
        if (stop_on_violation) return report;
      }
      continue;
    }

    for (size_t i = 0; i < actors.size(); ++i) {
      Sim next = node.sim;
      size_t pre_violations = next.violations.size();
      next.step(actors[i]);
      ++report.branches;

      std::vector<int> sched = node.schedule;
      sched.push_back(static_cast<int>(i));
      for (const CoreCtx& cc : next.ctx) report.phase_coverage.insert(cc.mon.phase);

      if (next.violations.size() > pre_violations) {
        note_violations(next, pre_violations, sched);
        if (stop_on_violation) return report;
      }

      std::string key = next.state_key();
      if (visited.insert(key).second) {
        report.states_visited = visited.size();
        if (visited.size() > budget) {
          report.budget_exceeded = true;
          throw SimError(ErrorCode::BudgetExceeded,
                         "exploration exceeded the state budget of " +
                             std::to_string(budget));
        }
        queue.push_back({std::move(next), node.depth + 1, std::move(sched)});
      }
    }
  }
  report.states_visited = visited.size();
  return report;
}

Sim make_sync_scenario_sim(int scenario, int cores, const Mutations& mutations) {
  SimConfig cfg;
  cfg.cluster.cores = cores;
  cfg.mutations = mutations;
  Sim sim = Sim::build(cfg, two_zones());
  sim.set_zone_program(1, {Action::work(2), Action::zone_exit(7)});
  sim.set_zone_program(2, {Action::zone_exit(0)});

  uint64_t ree = sim.region_base(RegionKind::ree());
  switch (scenario) {
    case 1:
      // Both cores inside monitor code; core 0 then asks for a zone.
      sim.set_normal_program(0, {Action::smc(1), Action::smc(100)});
      sim.set_normal_program(1, {Action::smc(2), Action::smc(3)});
      break;
    case 2:
      // Core 1 sleeps and may wake at any point of the window.
      sim.set_normal_program(0, {Action::smc(100)});
      sim.set_normal_program(1, {Action::wfi(), Action::read(ree + 0x200)});
      break;
    case 3:
    default:
      // Core 1 calls a TA while core 0 keeps running normal-world work.
      sim.set_normal_program(0, {Action::read(ree + 0x200), Action::read(ree + 0x208)});
      sim.set_normal_program(1, {Action::smc(100)});
      break;
  }
  for (int c = 2; c < cores; ++c) {
    sim.set_normal_program(c, {Action::read(ree + 0x300 + 0x10 * c)});
  }
  return sim;
}

Sim make_mutation_probe(const Mutations& mut) {
  SimConfig cfg = default_attack_config();
  cfg.mutations = mut;

  if (mut.skip_wake_ro) {
    return make_sync_scenario_sim(2, 2, mut);
  }
  if (mut.skip_halt) {
    Sim sim = Sim::build(cfg, two_zones());
    sim.set_zone_program(1, {Action::work(2), Action::zone_exit(0)});
    sim.set_zone_program(2, {Action::zone_exit(0)});
    sim.set_normal_program(0, {Action::smc(100)});
    sim.set_normal_program(
        1, {Action::read(sim.region_base(RegionKind::ree()) + 0x200)});
    return sim;
  }
  if (mut.skip_token_check) {
    return make_attack_sim(AttackId::A2_PpcHijack, cfg, /*token_guess_limit=*/1);
  }
  if (mut.skip_flush || mut.skip_coherency_off) {
    return make_attack_sim(AttackId::A3_CacheLeak, cfg, 1);
  }
  if (mut.skip_mmu_off) {
    return make_attack_sim(AttackId::A4_CodeInject, cfg, 1);
  }
  if (mut.skip_exit_invalidate) {
    // The poison must survive one exit and be flushed back by the next
    // entry's maintenance; two round trips.
    Sim sim = make_attack_sim(AttackId::A4_CodeInject, cfg, 1);
    sim.set_normal_program(0, {Action::smc(100), Action::smc(100)});
    return sim;
  }
  // skip_unlock / skip_reconf leave the MONITOR row in place for the zone.
  return make_attack_sim(AttackId::A1_Mapping, cfg, 1);
}

}  // namespace rezone
