#include "rezone/monitor.hpp"

#include <cassert>

#include "rezone/sim.hpp"

namespace rezone {

namespace {

void emit_phase(Sim& sim, int core_id, Phase p) {
  MonitorCtx& mon = sim.ctx[core_id].mon;
  mon.phase = p;
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = p;
  ev.kind = EventKind::PhaseEvt;
  ev.detail = to_string(p);
  sim.machine.trace.emit(ev);
}

void emit_ctx(Sim& sim, int core_id, bool restore, Phase phase) {
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Ctx;
  ev.flag = restore;
  sim.machine.trace.emit(ev);
}

void emit_lock(Sim& sim, int core_id, Phase phase) {
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Lock;
  ev.flag = sim.rz_lock.held();
  ev.value = static_cast<uint64_t>(sim.rz_lock.holder);
  sim.machine.trace.emit(ev);
}

/// Notify every other live core; normal-world cores at a step boundary park
/// immediately, cores inside EL3 code park when they leave it, sleepers stay
/// asleep with the halt latched.
void halt_others(Sim& sim, int except) {
  for (CoreState& c : sim.machine.cluster.cores) {
    if (c.id == except) continue;
    if (c.run == RunState::Done || c.run == RunState::Hung ||
        c.run == RunState::ParkedLock) {
      continue;
    }
    TraceEvent ev;
    ev.actor = except;
    ev.phase = Phase::SyncHalt;
    ev.kind = EventKind::Ipi;
    ev.value = static_cast<uint64_t>(c.id);
    sim.machine.trace.emit(ev);

    MonitorCtx& mon = sim.ctx[c.id].mon;
    if (c.run == RunState::Ready && c.world == World::Normal &&
        mon.phase == Phase::Idle && mon.service_left == 0 && !mon.woke_parked) {
      c.run = RunState::Halted;
    } else {
      c.halt_pending = true;
    }
  }
}

bool others_parked(const Sim& sim, int except) {
  for (const CoreState& c : sim.machine.cluster.cores) {
    if (c.id == except) continue;
    if (c.run == RunState::Ready || c.run == RunState::BlockedMq) return false;
  }
  return true;
}

void resume_others(Sim& sim, int except) {
  for (CoreState& c : sim.machine.cluster.cores) {
    if (c.id == except) continue;
    c.halt_pending = false;
    if (c.run == RunState::Halted || c.run == RunState::ParkedLock) {
      c.run = RunState::Ready;
    }
  }
}

void release_lock(Sim& sim, int core_id, Phase phase) {
  sim.rz_lock.holder = -1;
  emit_lock(sim, core_id, phase);
}

/// EL3-issued MU_A send; the token claim is read from the EL3-only register.
void send_el3_mq(Sim& sim, int core_id, MqKind kind, Phase phase) {
  CoreState& c = sim.core(core_id);
  MqMessage msg;
  msg.channel = MqChannel::MuA;
  msg.kind = kind;
  msg.token_claim = c.token_reg;
  msg.sender_core = core_id;

  AccessRequest req;
  req.core = core_id;
  req.addr = sim.machine.mu_a_window();
  req.is_write = true;
  req.mq_payload = msg;
  AccessResult r = mem_access(sim.machine, req, phase);
  assert(r.ok() && "the monitor can always reach MU_A");

  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::MqSend;
  ev.mq = kind;
  ev.flag = true;
  sim.machine.trace.emit(ev);

  c.run = RunState::BlockedMq;
  MonitorCtx& mon = sim.ctx[core_id].mon;
  mon.awaiting_reply = true;
  mon.reply_phase = phase;
}

/// The trusted OS boots with its own stage-1 tables: identity maps of the
/// zone's private region (secure) and the shared region (non-secure).
void prime_zone_mappings(Sim& sim, int core_id, uint16_t zone) {
  CoreState& c = sim.core(core_id);
  c.s1_mappings.clear();
  const Region& own = sim.machine.layout.find(RegionKind::zone(zone));
  for (PhysAddr a = own.start; a < own.end(); a += kPageBytes) {
    c.s1_mappings.push_back({a, a, false, true});
  }
  const Region& sh = sim.machine.layout.find(RegionKind::shared());
  for (PhysAddr a = sh.start; a < sh.end(); a += kPageBytes) {
    c.s1_mappings.push_back({a, a, true, true});
  }
}

PhysAddr result_slot(const Sim& sim, int core_id) {
  return sim.machine.layout.base_of(RegionKind::shared()) + 0x40 +
         static_cast<uint64_t>(core_id) * kWordBytes;
}

void enter_zone(Sim& sim, int core_id) {
  MonitorCtx& mon = sim.ctx[core_id].mon;
  CoreState& c = sim.core(core_id);
  emit_ctx(sim, core_id, /*restore=*/true, mon.phase);
  prime_zone_mappings(sim, core_id, mon.target_zone);
  sim.active_zone = mon.target_zone;
  sim.registry.last_zone = mon.target_zone;
  mon.zone_pc = 0;
  c.el = El::EL1;
  emit_phase(sim, core_id, Phase::InZone);
}

void return_to_caller(Sim& sim, int core_id, uint64_t result, Phase phase) {
  CoreState& c = sim.core(core_id);
  emit_ctx(sim, core_id, /*restore=*/true, phase);
  c.el = El::EL1;
  c.world = World::Normal;
  sim.ctx[core_id].last_result = result;
  ++sim.ctx[core_id].pc;
  emit_phase(sim, core_id, Phase::Idle);
  if (c.halt_pending) c.run = RunState::Halted;
}

void entry_abort(Sim& sim, int core_id) {
  // Fail closed: the matrix was never moved off the MONITOR row.
  resume_others(sim, core_id);
  release_lock(sim, core_id, Phase::Unlock);
  return_to_caller(sim, core_id, kUnknownSmcResult, Phase::Unlock);
}

/// Entry stage 1: maintenance (A, conditional B) and the unlock request (C).
void entry_maintenance_step(Sim& sim, int core_id) {
  const Mutations& mut = sim.config.mutations;
  MonitorCtx& mon = sim.ctx[core_id].mon;

  emit_phase(sim, core_id, Phase::Flush);
  if (!mut.skip_flush) flush_caches(sim.machine, core_id, Phase::Flush);

  if (sim.registry.last_zone != std::optional<uint16_t>(mon.target_zone)) {
    emit_phase(sim, core_id, Phase::Tlbi);
    tlb_invalidate(sim.machine, core_id, Phase::Tlbi);
  }

  emit_phase(sim, core_id, Phase::Unlock);
  // Trampoline code resumes after the maintenance; its translation refills
  // the shared TLB here, under the still-open MONITOR row.
  sim.el3_vector_fetch(core_id, Phase::Unlock);
  mon.substep = 2;
  if (!mut.skip_unlock) {
    send_el3_mq(sim, core_id, MqKind::UnlockPpc, Phase::Unlock);
  }
}

/// Entry stage 2: PPC reconfiguration (D) and the relock request.
void entry_reconf_step(Sim& sim, int core_id) {
  const Mutations& mut = sim.config.mutations;
  MonitorCtx& mon = sim.ctx[core_id].mon;

  if (!mut.skip_unlock && mon.last_reply == MqKind::Nack) {
    entry_abort(sim, core_id);
    return;
  }
  emit_phase(sim, core_id, Phase::Reconf);
  if (!mut.skip_reconf) {
    apply_zone_row(sim.machine.ppc, sim.registry.manifest(mon.target_zone),
                   sim.machine.layout, sim.machine.trace, kClusterMaster,
                   Phase::Reconf);
  }
  mon.substep = 3;
  if (!mut.skip_unlock) {
    send_el3_mq(sim, core_id, MqKind::LockPpc, Phase::Reconf);
  }
}

/// Entry stage 3: coherency off, EL3 MMU off (E), drop to S.EL1.
void entry_drop_step(Sim& sim, int core_id) {
  const Mutations& mut = sim.config.mutations;
  CoreState& c = sim.core(core_id);

  emit_phase(sim, core_id, Phase::MmuOff);
  if (!mut.skip_coherency_off) {
    set_coherency(sim.machine, core_id, false, Phase::MmuOff);
  }
  if (!mut.skip_mmu_off) {
    c.el3_mmu_on = false;
  }
  // The jump into the trusted OS: the last EL3 fetch of the switch.
  sim.el3_vector_fetch(core_id, Phase::MmuOff);
  enter_zone(sim, core_id);
}

/// Exit stage 2: restore the MONITOR row (D') and relock (C').
void exit_reconf_step(Sim& sim, int core_id) {
  const Mutations& mut = sim.config.mutations;
  MonitorCtx& mon = sim.ctx[core_id].mon;

  emit_phase(sim, core_id, Phase::ReconfBack);
  apply_monitor_row(sim.machine.ppc, sim.machine.layout, sim.machine.trace,
                    kClusterMaster, Phase::ReconfBack);
  emit_phase(sim, core_id, Phase::Relock);
  mon.substep = 12;
  if (!mut.skip_unlock) {
    send_el3_mq(sim, core_id, MqKind::LockPpc, Phase::Relock);
  }
}

/// Exit stage 3: MMU back on (E'), coherency on, resume the cluster, return
/// the result through shared memory.
void exit_resume_step(Sim& sim, int core_id) {
  MonitorCtx& mon = sim.ctx[core_id].mon;
  CoreState& c = sim.core(core_id);

  emit_phase(sim, core_id, Phase::MmuOn);
  c.el3_mmu_on = true;
  set_coherency(sim.machine, core_id, true, Phase::MmuOn);
  sim.active_zone.reset();

  emit_phase(sim, core_id, Phase::Resume);
  release_lock(sim, core_id, Phase::Resume);
  resume_others(sim, core_id);

  // Result handoff via M_SH; written with NS=1 so the caller's non-secure
  // read sees the same cache line.
  AccessRequest wr;
  wr.core = core_id;
  wr.addr = result_slot(sim, core_id);
  wr.is_write = true;
  wr.wval = mon.exit_result;
  {
    // EL3 writes the NS alias of shared memory. Modeled as a normal-world
    // tagged store issued from the monitor.
    World saved = c.world;
    c.world = World::Normal;
    mem_access(sim.machine, wr, Phase::Resume);
    c.world = saved;
  }

  emit_ctx(sim, core_id, /*restore=*/true, Phase::Resume);
  c.el = El::EL1;
  c.world = World::Normal;

  AccessRequest rd;
  rd.core = core_id;
  rd.addr = result_slot(sim, core_id);
  AccessResult res = mem_access(sim.machine, rd, Phase::Resume);
  sim.ctx[core_id].last_result = res.ok() ? res.value : kUnknownSmcResult;
  ++sim.ctx[core_id].pc;
  mon.exiting = false;
  emit_phase(sim, core_id, Phase::Idle);
  if (c.halt_pending) c.run = RunState::Halted;
}

/// Plain-TrustZone exit: context juggling and the shared-memory result
/// handoff, none of the maintenance chain.
void exit_resume_noprotocol(Sim& sim, int core_id) {
  MonitorCtx& mon = sim.ctx[core_id].mon;
  CoreState& c = sim.core(core_id);

  AccessRequest wr;
  wr.core = core_id;
  wr.addr = result_slot(sim, core_id);
  wr.is_write = true;
  wr.wval = mon.exit_result;
  {
    World saved = c.world;
    c.world = World::Normal;
    mem_access(sim.machine, wr, Phase::Idle);
    c.world = saved;
  }

  emit_ctx(sim, core_id, /*restore=*/true, Phase::Idle);
  c.el = El::EL1;
  c.world = World::Normal;

  AccessRequest rd;
  rd.core = core_id;
  rd.addr = result_slot(sim, core_id);
  AccessResult res = mem_access(sim.machine, rd, Phase::Idle);
  sim.ctx[core_id].last_result = res.ok() ? res.value : kUnknownSmcResult;
  ++sim.ctx[core_id].pc;
  mon.exiting = false;
  emit_phase(sim, core_id, Phase::Idle);
}

void finish_wake(Sim& sim, int core_id) {
  CoreState& c = sim.core(core_id);
  MonitorCtx& mon = sim.ctx[core_id].mon;
  // Window closed: the wake handler proceeds into monitor code.
  AccessRequest req;
  req.core = core_id;
  req.addr = sim.machine.layout.base_of(RegionKind::monitor()) + 0x40;
  mem_access(sim.machine, req, Phase::Idle);
  c.el3_mmu_on = true;
  c.el = El::EL1;
  c.world = World::Normal;
  mon.woke_parked = false;
  if (c.halt_pending) c.run = RunState::Halted;
}

void monitor_service_step(Sim& sim, int core_id) {
  MonitorCtx& mon = sim.ctx[core_id].mon;
  PhysAddr base = sim.machine.layout.base_of(RegionKind::monitor());
  AccessRequest rd;
  rd.core = core_id;
  rd.addr = base + 0x300;
  mem_access(sim.machine, rd, Phase::Idle);
  AccessRequest wr;
  wr.core = core_id;
  wr.addr = base + 0x308;
  wr.is_write = true;
  wr.wval = mon.smc_id;
  mem_access(sim.machine, wr, Phase::Idle);

  if (--mon.service_left == 0) {
    return_to_caller(sim, core_id, mon.smc_id, Phase::Idle);
  }
}

}  // namespace

DispatchOutcome smc_dispatch(Sim& sim, int core_id, uint64_t smc_id) {
  CoreState& c = sim.core(core_id);
  CoreCtx& cc = sim.ctx[core_id];
  assert(c.run == RunState::Ready);

  // Trap to EL3.
  c.el = El::EL3;
  c.world = World::Secure;
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = Phase::Idle;
  ev.kind = EventKind::Smc;
  ev.value = smc_id;
  sim.machine.trace.emit(ev);
  emit_ctx(sim, core_id, /*restore=*/false, Phase::Idle);
  if (!sim.el3_vector_fetch(core_id, Phase::Idle)) {
    return {DispatchOutcome::Kind::UnknownId, 0};
  }

  RouteResult route = route_smc(sim.registry, smc_id);
  switch (route.kind) {
    case RouteResult::Kind::Zone: {
      MonitorCtx& mon = cc.mon;
      mon.target_zone = route.zone_id;
      mon.smc_id = smc_id;
      mon.exiting = false;
      mon.substep = 0;
      emit_phase(sim, core_id, Phase::SyncHalt);
      return {DispatchOutcome::Kind::ZoneEntry, route.zone_id};
    }
    case RouteResult::Kind::MonitorService:
      cc.mon.smc_id = smc_id;
      cc.mon.service_left = 2;
      return {DispatchOutcome::Kind::MonitorService, 0};
    case RouteResult::Kind::Unknown:
    default:
      return_to_caller(sim, core_id, kUnknownSmcResult, Phase::Idle);
      return {DispatchOutcome::Kind::UnknownId, 0};
  }
}

void monitor_engine_step(Sim& sim, int core_id) {
  MonitorCtx& mon = sim.ctx[core_id].mon;

  if (mon.woke_parked) {
    finish_wake(sim, core_id);
    return;
  }
  if (mon.phase == Phase::Idle && mon.service_left > 0) {
    monitor_service_step(sim, core_id);
    return;
  }

  switch (mon.substep) {
    case 0: {  // SYNC_HALT: serialize on rz_lock, park the cluster
      if (sim.config.mode == SecurityMode::NoRz) {
        enter_zone(sim, core_id);
        return;
      }
      if (sim.rz_lock.holder != core_id) {
        if (sim.rz_lock.held()) {
          sim.core(core_id).run = RunState::ParkedLock;
          return;
        }
        sim.rz_lock.holder = core_id;
        emit_lock(sim, core_id, Phase::SyncHalt);
        if (!sim.config.mutations.skip_halt) halt_others(sim, core_id);
      }
      if (sim.config.mutations.skip_halt || others_parked(sim, core_id)) {
        mon.substep = 1;
      }
      // Barrier incomplete: stay in SYNC_HALT, progress comes from the
      // other cores reaching a parked state.
      if (mon.substep == 1) entry_maintenance_step(sim, core_id);
      return;
    }
    case 2:
      entry_reconf_step(sim, core_id);
      return;
    case 3:
      entry_drop_step(sim, core_id);
      return;
    case 11:
      exit_reconf_step(sim, core_id);
      return;
    case 12:
      exit_resume_step(sim, core_id);
      return;
    default:
      assert(false && "engine scheduled in an unexpected stage");
      return;
  }
}

void zone_exit_begin(Sim& sim, int core_id, uint64_t result) {
  CoreState& c = sim.core(core_id);
  MonitorCtx& mon = sim.ctx[core_id].mon;
  mon.exit_result = result;
  mon.exiting = true;

  // Trap to EL3: the vector fetch is the first thing the hardware does.
  c.el = El::EL3;
  emit_ctx(sim, core_id, /*restore=*/false, Phase::InZone);

  if (sim.config.mode == SecurityMode::NoRz) {
    if (!sim.el3_vector_fetch(core_id, Phase::InZone)) return;
    sim.active_zone.reset();
    exit_resume_noprotocol(sim, core_id);
    return;
  }

  emit_phase(sim, core_id, Phase::ExitInvalidate);
  if (!sim.el3_vector_fetch(core_id, Phase::ExitInvalidate)) return;
  if (!sim.config.mutations.skip_exit_invalidate) {
    invalidate_trampoline_lines(sim.machine, core_id, Phase::ExitInvalidate);
  }
  // Post-F integrity: what the next main-memory fetch would execute.
  TraceEvent iv;
  iv.actor = core_id;
  iv.phase = Phase::ExitInvalidate;
  iv.kind = EventKind::Integrity;
  iv.flag = hash_region(sim.machine, RegionKind::trampoline()) ==
            sim.manifest.trampoline_hash;
  sim.machine.trace.emit(iv);

  emit_phase(sim, core_id, Phase::Unlock);
  mon.substep = 11;
  if (!sim.config.mutations.skip_unlock) {
    send_el3_mq(sim, core_id, MqKind::UnlockPpc, Phase::Unlock);
  }
}

void core_wake_step(Sim& sim, int core_id) {
  CoreState& c = sim.core(core_id);
  MonitorCtx& mon = sim.ctx[core_id].mon;
  bool window = sim.rz_lock.held() || sim.active_zone.has_value();

  if (!window) {
    // Quiet system: wake straight through monitor code into the program.
    c.run = RunState::Ready;
    if (c.halt_pending) c.run = RunState::Halted;
    return;
  }

  // Wakes land at EL3 with the MMU still off (warm boot). The wait loop
  // lives in read-only trampoline memory so a running zone cannot block or
  // tamper with it; the mutant waits in regular monitor code instead.
  c.el = El::EL3;
  c.el3_mmu_on = false;
  PhysAddr wait_code =
      sim.config.mutations.skip_wake_ro
          ? sim.machine.layout.base_of(RegionKind::monitor()) + 0x40
          : sim.machine.layout.base_of(RegionKind::trampoline()) + 0x40;
  AccessRequest req;
  req.core = core_id;
  req.addr = wait_code;
  mem_access(sim.machine, req, Phase::Idle);
  c.run = RunState::ParkedLock;
  mon.woke_parked = true;
}

SafetyVerdict sync_scenario(Sim& sim, const std::vector<int>& schedule, int max_steps) {
  int steps = 0;
  for (int choice : schedule) {
    if (sim.all_done() || steps >= max_steps) break;
    std::vector<int> actors = sim.runnable_actors();
    if (actors.empty()) break;
    sim.step(actors[static_cast<size_t>(choice) % actors.size()]);
    ++steps;
  }
  while (!sim.all_done() && steps < max_steps) {
    std::vector<int> actors = sim.runnable_actors();
    if (actors.empty()) break;
    sim.step(actors[static_cast<size_t>(steps) % actors.size()]);
    ++steps;
  }

  SafetyVerdict v;
  if (!sim.violations.empty()) {
    v.safe = false;
    v.reason = to_string(sim.violations.front().kind) + ": " +
               sim.violations.front().detail;
  } else if (!sim.all_done()) {
    v.safe = false;
    v.reason = sim.runnable_actors().empty() ? "deadlock" : "incomplete at step bound";
  }
  return v;
}

}  // namespace rezone
