#include "rezone/sim.hpp"

#include <algorithm>
#include <cassert>

#include "rezone/errors.hpp"
#include "rezone/prng.hpp"

namespace rezone {

std::string to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::P1: return "P1";
    case Violation::Kind::P2: return "P2";
    case Violation::Kind::P3: return "P3";
    case Violation::Kind::Safety: return "SAFETY";
  }
  return "?";
}

namespace {

// Canary magic values; high-entropy constants so legitimate data never
// collides with them.
constexpr uint64_t kCanaryRee = 0xC3A4A57EE0001ULL;
constexpr uint64_t kCanaryMonitor = 0xC3A4A57EE0002ULL;
constexpr uint64_t kCanaryZone2 = 0xC3A4A57EE0003ULL;
constexpr uint64_t kCanaryGatekeeper = 0xC3A4A57EE0004ULL;

}  // namespace

Sim Sim::build(const SimConfig& config, const std::vector<ZoneManifest>& zones) {
  Sim s;
  s.config = config;
  for (const ZoneManifest& z : zones) {
    register_zone(s.registry, z);
  }
  MemoryLayout layout = build_layout(zones, config.layout);
  s.machine = make_machine(layout, config.cluster);
  s.normal_programs.resize(config.cluster.cores);
  s.ctx.resize(config.cluster.cores);
  s.core_observed.resize(config.cluster.cores);
  for (const ZoneManifest& z : zones) {
    s.zone_honest[z.zone_id] = true;
  }
  s.install_images();
  return s;
}

void Sim::install_images() {
  // Region images are the deterministic background pattern of MainMemory;
  // only deliberate content is written. Canaries are part of the installed
  // image, so the manifest hashes cover them.
  if (config.plant_canaries) {
    canary_values[0] = kCanaryRee;
    canary_values[1] = kCanaryMonitor;
    canary_values[2] = kCanaryZone2;
    canary_values[3] = kCanaryGatekeeper;
    machine.memory.store(region_base(RegionKind::ree()) + kCanaryOffset, kCanaryRee);
    machine.memory.store(region_base(RegionKind::monitor()) + kCanaryOffset, kCanaryMonitor);
    machine.memory.store(region_base(RegionKind::gatekeeper()) + kCanaryOffset,
                         kCanaryGatekeeper);
    if (registry.zones.count(2)) {
      machine.memory.store(region_base(RegionKind::zone(2)) + kCanaryOffset, kCanaryZone2);
    }
  }

  const Region& tramp = machine.layout.find(RegionKind::trampoline());
  pristine_trampoline.clear();
  for (PhysAddr a = tramp.start; a < tramp.end(); a += kWordBytes) {
    pristine_trampoline.push_back(machine.memory.load(a));
  }

  manifest.monitor_hash = hash_region(machine, RegionKind::monitor());
  manifest.trampoline_hash = hash_region(machine, RegionKind::trampoline());
  manifest.gatekeeper_hash = hash_region(machine, RegionKind::gatekeeper());
}

void Sim::pre_boot_patch(RegionKind region, uint64_t offset, uint64_t value) {
  assert(!boot_done && "firmware tampering is a pre-boot attack");
  machine.memory.store(region_base(region) + offset, value);
}

void Sim::boot() {
  gk = gk_boot(machine, config.boot_seed, config.token_bits, manifest, untrusted_started);
  gk.skip_token_check = config.mutations.skip_token_check;
  boot_done = true;

  TraceEvent ev;
  ev.actor = kGatekeeperActor;
  ev.phase = Phase::Boot;
  ev.kind = EventKind::BootEvt;
  ev.detail = "boot_complete";
  machine.trace.emit(ev);
}

std::vector<int> Sim::runnable_actors() const {
  std::vector<int> out;
  for (const CoreState& c : machine.cluster.cores) {
    if (c.run == RunState::Ready || c.run == RunState::Sleeping) out.push_back(c.id);
  }
  if (machine.mu.request_pending()) out.push_back(kGatekeeperActor);
  return out;
}

bool Sim::core_done(int core_id) const { return core(core_id).run == RunState::Done; }

bool Sim::all_done() const {
  for (const CoreState& c : machine.cluster.cores) {
    if (c.run != RunState::Done) return false;
  }
  return true;
}

void Sim::observe(int core_id, uint64_t value) {
  bool in_zone = active_zone.has_value() && core(core_id).world == World::Secure &&
                 core(core_id).el != El::EL3;
  if (in_zone) {
    zone_observed[*active_zone].insert(value);
    // Canary scan: an attacker-observable word matching a planted canary is
    // an information-flow violation even if the access path was indirect.
    uint16_t z = *active_zone;
    Violation v;
    v.seq = machine.trace.next_seq;
    if (value == canary_values[0] && value != 0) {
      v.kind = Violation::Kind::P1;
      v.detail = "zone " + std::to_string(z) + " observed the REE canary";
      violations.push_back(v);
    } else if ((value == canary_values[1] || value == canary_values[3]) && value != 0) {
      v.kind = Violation::Kind::P2;
      v.detail = "zone " + std::to_string(z) + " observed a monitor/gatekeeper canary";
      violations.push_back(v);
    } else if (value == canary_values[2] && value != 0 && z != 2) {
      v.kind = Violation::Kind::P3;
      v.detail = "zone " + std::to_string(z) + " observed zone 2's canary";
      violations.push_back(v);
    }
  } else {
    core_observed[core_id].insert(value);
  }
}

bool Sim::el3_vector_fetch(int core_id, Phase phase) {
  AccessRequest req;
  req.core = core_id;
  req.addr = trampoline_vector_pa();
  req.is_write = false;
  req.via_mmu = true;
  req.is_fetch = true;
  AccessResult r = mem_access(machine, req, phase);
  if (!r.ok()) {
    core(core_id).run = RunState::Hung;
    Violation v;
    v.kind = Violation::Kind::Safety;
    v.detail = r.fault == FaultKind::TlbWalkBlocked
                   ? "EL3 vector fetch blocked by a denied page-table walk (hang)"
                   : "EL3 vector fetch faulted";
    v.seq = machine.trace.next_seq;
    violations.push_back(v);
    return false;
  }

  // Integrity of what EL3 actually fetched: the line content as served (from
  // a cache when the MMU is on, from main memory otherwise) against the
  // installed image.
  size_t line_words = machine.line_bytes / kWordBytes;
  uint64_t line_pa = machine.line_of(trampoline_vector_pa());
  bool ok = true;
  const CacheLine* line = nullptr;
  if (core(core_id).el3_mmu_on) {
    Machine& m = machine;
    line = m.cluster.cores[core_id].l1.find(line_pa, false);
    if (!line) line = m.cluster.l2.find(line_pa, false);
  }
  for (size_t i = 0; i < line_words; ++i) {
    uint64_t fetched = line ? line->words[i] : machine.memory.load(line_pa + i * kWordBytes);
    if (fetched != pristine_trampoline[i]) ok = false;
  }

  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Integrity;
  ev.flag = ok;
  machine.trace.emit(ev);
  return true;
}

void Sim::step(int actor) {
  size_t first_event = machine.trace.events.size();
  ++steps_taken;

  if (actor == kGatekeeperActor) {
    if (machine.mu.request_pending()) {
      MqMessage msg = *machine.mu.request;
      machine.mu.request.reset();
      Phase phase = Phase::InZone;
      if (msg.sender_core >= 0 && ctx[msg.sender_core].mon.awaiting_reply) {
        phase = ctx[msg.sender_core].mon.reply_phase;
      }
      MqMessage reply = gk_handle(gk, machine, msg, phase);
      machine.mu.reply = reply;

      TraceEvent ev;
      ev.actor = kGatekeeperActor;
      ev.phase = phase;
      ev.kind = EventKind::MqReply;
      ev.mq = reply.kind;
      machine.trace.emit(ev);

      if (msg.sender_core >= 0) {
        CoreState& c = core(msg.sender_core);
        if (c.run == RunState::BlockedMq) c.run = RunState::Ready;
        ctx[msg.sender_core].mon.awaiting_reply = false;
        ctx[msg.sender_core].mon.last_reply = reply.kind;
      }
    }
    evaluate_step(first_event);
    return;
  }

  CoreState& c = core(actor);
  switch (c.run) {
    case RunState::Halted: {
      TraceEvent ev;
      ev.actor = actor;
      ev.phase = ctx[actor].mon.phase;
      ev.kind = EventKind::Halted;
      machine.trace.emit(ev);
      break;
    }
    case RunState::Sleeping:
      core_wake_step(*this, actor);
      break;
    case RunState::Ready: {
      MonitorCtx& mon = ctx[actor].mon;
      if (mon.phase == Phase::InZone) {
        run_zone_action(actor);
      } else if (mon.phase != Phase::Idle || mon.service_left > 0 || mon.woke_parked) {
        monitor_engine_step(*this, actor);
      } else {
        run_program_action(actor);
      }
      break;
    }
    case RunState::ParkedLock:
    case RunState::BlockedMq:
    case RunState::Hung:
    case RunState::Done:
      break;  // not schedulable; tolerated as a no-op
  }

  evaluate_step(first_event);
  if (!machine.trace.retain) {
    machine.trace.events.resize(first_event);
  }
}

void Sim::run_program_action(int core_id) {
  CoreState& c = core(core_id);
  CoreCtx& cc = ctx[core_id];
  const Program& prog = normal_programs[core_id];
  if (cc.pc >= static_cast<int>(prog.size())) {
    c.run = RunState::Done;
    return;
  }
  untrusted_started = true;
  registry.frozen = true;

  const Action& act = prog[cc.pc];
  switch (act.kind) {
    case Action::Kind::Smc:
      smc_dispatch(*this, core_id, act.a);
      return;  // pc advances when the call completes
    case Action::Kind::Read: {
      AccessRequest req;
      req.core = core_id;
      req.addr = act.a;
      AccessResult r = mem_access(machine, req, Phase::Idle);
      if (r.ok()) {
        cc.last_result = r.value;
        observe(core_id, r.value);
      }
      ++cc.pc;
      break;
    }
    case Action::Kind::Write: {
      AccessRequest req;
      req.core = core_id;
      req.addr = act.a;
      req.is_write = true;
      req.wval = act.b;
      mem_access(machine, req, Phase::Idle);
      ++cc.pc;
      break;
    }
    case Action::Kind::Wfi:
      c.run = RunState::Sleeping;
      ++cc.pc;
      break;
    default:
      assert(false && "zone-only action in a normal-world program");
      ++cc.pc;
      break;
  }
  if (c.halt_pending && c.run == RunState::Ready) {
    c.run = RunState::Halted;
  }
}

void Sim::run_zone_action(int core_id) {
  CoreState& c = core(core_id);
  CoreCtx& cc = ctx[core_id];
  assert(active_zone.has_value());
  uint16_t zone = *active_zone;
  untrusted_started = true;
  const Program& prog = zone_programs[zone];
  MonitorCtx& mon = cc.mon;

  if (mon.guess_active) {
    // Token brute force: alternate send / check-reply, one pair per attempt.
    if (mon.awaiting_reply) return;  // still blocked (shouldn't be scheduled)
    if (mon.guess_count > 0) {
      // A reply to the previous claim is in.
      if (mon.last_reply_ack()) {
        mon.guess_succeeded = true;
        mon.guess_active = false;
        ++mon.zone_pc;
        return;
      }
      if (mon.guess_next + 1 >= mon.guess_limit) {
        mon.guess_active = false;
        ++mon.zone_pc;
        return;
      }
      ++mon.guess_next;
    }
    send_zone_mq(core_id, MqKind::UnlockPpc, mon.guess_next, MqChannel::MuA);
    ++mon.guess_count;
    return;
  }

  if (mon.zone_pc >= static_cast<int>(prog.size())) {
    zone_exit_begin(*this, core_id, 0);
    return;
  }

  const Action& act = prog[mon.zone_pc];
  switch (act.kind) {
    case Action::Kind::Map: {
      uint64_t va_page = page_of(act.a);
      MappingEntry entry{va_page, page_of(act.b), act.c != 0, act.d != 0};
      bool replaced = false;
      for (MappingEntry& e : c.s1_mappings) {
        if (e.va_page == va_page) {
          e = entry;
          replaced = true;
          break;
        }
      }
      if (!replaced) c.s1_mappings.push_back(entry);
      // Stale translations for the page are superseded.
      auto& tlb = machine.cluster.s1_tlb;
      tlb.erase(std::remove_if(tlb.begin(), tlb.end(),
                               [&](const TlbEntry& e) {
                                 return !e.el3 && e.va_page == va_page;
                               }),
                tlb.end());
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::ReadVa: {
      AccessRequest req;
      req.core = core_id;
      req.addr = act.a;
      AccessResult r = mem_access(machine, req, Phase::InZone);
      if (r.ok()) observe(core_id, r.value);
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::WriteVa: {
      AccessRequest req;
      req.core = core_id;
      req.addr = act.a;
      req.is_write = true;
      req.wval = act.b;
      mem_access(machine, req, Phase::InZone);
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::Work: {
      const Region& own = machine.layout.find(RegionKind::zone(zone));
      for (uint64_t u = 0; u < act.a; ++u) {
        AccessRequest req;
        req.core = core_id;
        req.addr = own.start + 0x800 + ((cc.work_cursor++) % 8) * kWordBytes;
        req.is_write = true;
        req.wval = 0xB0B0 + u;
        mem_access(machine, req, Phase::InZone);
      }
      TraceEvent ev;
      ev.actor = core_id;
      ev.phase = Phase::InZone;
      ev.kind = EventKind::Work;
      ev.count = static_cast<uint32_t>(act.a);
      machine.trace.emit(ev);
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::SendMq: {
      ++mon.zone_pc;
      send_zone_mq(core_id, act.mq_kind, act.a,
                   act.c != 0 ? MqChannel::MuB : MqChannel::MuA);
      break;
    }
    case Action::Kind::Guess:
      mon.guess_active = true;
      mon.guess_next = 0;
      mon.guess_limit = act.a;
      mon.guess_count = 0;
      mon.guess_succeeded = false;
      send_zone_mq(core_id, MqKind::UnlockPpc, 0, MqChannel::MuA);
      mon.guess_count = 1;
      break;
    case Action::Kind::PpcEdit: {
      // A config write is a bus write to the PPC's MMIO registers.
      ensure_zone_mapping(core_id, region_base(RegionKind::ppc_mmio()), false);
      AccessRequest req;
      req.core = core_id;
      req.addr = region_base(RegionKind::ppc_mmio());
      req.is_write = true;
      req.wval = 0;
      AccessResult r = mem_access(machine, req, Phase::InZone);
      if (r.ok()) {
        ppc_write_config(machine.ppc, machine.layout, kClusterMaster, act.edit,
                         machine.trace, Phase::InZone);
      }
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::ReadToken: {
      // TPIDR_EL3 is inaccessible below EL3: the read traps, no value moves.
      TraceEvent ev;
      ev.actor = core_id;
      ev.phase = Phase::InZone;
      ev.kind = EventKind::TokenTrap;
      machine.trace.emit(ev);
      ++mon.zone_pc;
      break;
    }
    case Action::Kind::ZoneExit:
      zone_exit_begin(*this, core_id, act.a);
      break;
    default:
      assert(false && "normal-world action in a zone program");
      ++mon.zone_pc;
      break;
  }
}

void Sim::send_zone_mq(int core_id, MqKind kind, uint64_t claim, MqChannel channel) {
  MonitorCtx& mon = ctx[core_id].mon;
  PhysAddr window = channel == MqChannel::MuB ? machine.mu_b_window() : machine.mu_a_window();
  ensure_zone_mapping(core_id, window, channel == MqChannel::MuA);

  MqMessage msg;
  msg.channel = channel;
  msg.kind = kind;
  msg.token_claim = claim;
  msg.sender_core = core_id;

  AccessRequest req;
  req.core = core_id;
  req.addr = window;
  req.is_write = true;
  req.mq_payload = msg;
  AccessResult r = mem_access(machine, req, Phase::InZone);

  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = Phase::InZone;
  ev.kind = EventKind::MqSend;
  ev.mq = kind;
  ev.flag = r.ok();
  machine.trace.emit(ev);

  if (r.ok() && channel == MqChannel::MuA) {
    core(core_id).run = RunState::BlockedMq;
    mon.awaiting_reply = true;
    mon.reply_phase = Phase::InZone;
  }
  // A denied send (MU_B impersonation) just faults; the program continues.
}

void Sim::ensure_zone_mapping(int core_id, PhysAddr pa, bool ns) {
  CoreState& c = core(core_id);
  uint64_t page = page_of(pa);
  for (const MappingEntry& e : c.s1_mappings) {
    if (e.va_page == page) return;
  }
  c.s1_mappings.push_back({page, page, ns, true});
}

void Sim::evaluate_step(size_t first_event) {
  const auto& events = machine.trace.events;
  for (size_t i = first_event; i < events.size(); ++i) {
    const TraceEvent& ev = events[i];

    if (ev.kind == EventKind::Mem) {
      bool success = ev.verdict == MemVerdict::HitValue ||
                     ev.verdict == MemVerdict::HitSilentWrite ||
                     ev.verdict == MemVerdict::MissFilled ||
                     ev.verdict == MemVerdict::Bypass;
      if (success && ev.has_region) {
        if (ev.world == World::Secure && active_zone.has_value() &&
            ev.region.tag == RegionTag::Ree) {
          violations.push_back({Violation::Kind::P1,
                                "secure access reached REE memory while zone " +
                                    std::to_string(*active_zone) + " was active",
                                ev.seq});
        }
        if (ev.world == World::Secure && ev.el != El::EL3 &&
            (ev.region.tag == RegionTag::Monitor ||
             ev.region.tag == RegionTag::Gatekeeper)) {
          violations.push_back({Violation::Kind::P2,
                                "S.EL1 access reached " + to_string(ev.region),
                                ev.seq});
        }
        if (active_zone.has_value() && ev.world == World::Secure && ev.el != El::EL3 &&
            ev.region.tag == RegionTag::Zone && ev.region.id != *active_zone) {
          violations.push_back({Violation::Kind::P3,
                                "zone " + std::to_string(*active_zone) +
                                    " reached zone " + std::to_string(ev.region.id) +
                                    "'s memory",
                                ev.seq});
        }
      }
      bool fault = !success;
      if (fault) {
        bool attacker_context = active_zone.has_value() &&
                                ev.world == World::Secure && ev.el != El::EL3 &&
                                !zone_honest_at(*active_zone);
        if (!attacker_context) {
          violations.push_back({Violation::Kind::Safety,
                                "live core denied: " + to_string(ev.verdict) +
                                    (ev.has_region ? " on " + to_string(ev.region) : ""),
                                ev.seq});
        }
      }
    }

    // Trampoline main-memory integrity, as the next MMU-off EL3 fetch sees it.
    bool tramp_write =
        (ev.kind == EventKind::Mem && ev.has_region && ev.is_write &&
         ev.region.tag == RegionTag::Trampoline &&
         (ev.verdict == MemVerdict::MissFilled || ev.verdict == MemVerdict::Bypass)) ||
        (ev.kind == EventKind::PpcCheck && ev.has_region && ev.is_write && ev.flag &&
         ev.region.tag == RegionTag::Trampoline);
    if (tramp_write &&
        hash_region(machine, RegionKind::trampoline()) != manifest.trampoline_hash) {
      violations.push_back({Violation::Kind::P2,
                            "trampoline image in main memory was modified", ev.seq});
    }

    if (ev.kind == EventKind::Integrity && !ev.flag) {
      violations.push_back({Violation::Kind::P2,
                            "EL3 fetched modified trampoline content", ev.seq});
    }
  }
}

bool Sim::zone_honest_at(uint16_t zone) const {
  auto it = zone_honest.find(zone);
  return it == zone_honest.end() ? true : it->second;
}

namespace {

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (i * 8)) & 0xff));
}
void put_u8(std::string& out, uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_cache(std::string& out, const Cache& c) {
  put_u64(out, c.lines.size());
  for (const CacheLine& l : c.lines) {
    put_u64(out, l.pa_line);
    put_u8(out, l.ns);
    put_u8(out, l.dirty);
    for (uint64_t w : l.words) put_u64(out, w);
  }
}

}  // namespace

std::string Sim::state_key() const {
  std::string out;
  out.reserve(512);
  for (const CoreState& c : machine.cluster.cores) {
    put_u8(out, static_cast<uint8_t>(c.el));
    put_u8(out, static_cast<uint8_t>(c.world));
    put_u8(out, c.el3_mmu_on);
    put_u8(out, static_cast<uint8_t>(c.run));
    put_u8(out, c.halt_pending);
    put_u64(out, c.token_reg);
    put_u64(out, c.s1_mappings.size());
    for (const MappingEntry& e : c.s1_mappings) {
      put_u64(out, e.va_page);
      put_u64(out, e.pa_page);
      put_u8(out, e.ns);
      put_u8(out, e.writable);
    }
    put_cache(out, c.l1);
  }
  put_cache(out, machine.cluster.l2);
  put_u64(out, machine.cluster.s1_tlb.size());
  for (const TlbEntry& e : machine.cluster.s1_tlb) {
    put_u64(out, e.va_page);
    put_u64(out, e.pa_page);
    put_u8(out, e.ns);
    put_u8(out, e.writable);
    put_u8(out, e.el3);
  }
  put_u8(out, machine.cluster.coherency_on);

  for (const auto& dom : machine.ppc.perms) {
    for (Permission p : dom) put_u8(out, static_cast<uint8_t>(p));
  }
  for (uint32_t b : machine.ppc.bindings) put_u64(out, b);
  put_u8(out, machine.ppc.locked);

  put_u8(out, gk.booted);
  put_u64(out, gk.auth_failures);

  auto put_msg = [&](const std::optional<MqMessage>& m) {
    put_u8(out, m.has_value());
    if (m) {
      put_u8(out, static_cast<uint8_t>(m->channel));
      put_u8(out, static_cast<uint8_t>(m->kind));
      put_u64(out, m->token_claim);
      put_u64(out, static_cast<uint64_t>(m->sender_core));
    }
  };
  put_msg(machine.mu.request);
  put_msg(machine.mu.reply);

  put_u64(out, static_cast<uint64_t>(rz_lock.holder));
  put_u64(out, registry.last_zone ? *registry.last_zone : 0xffff);
  put_u64(out, active_zone ? *active_zone : 0xffff);
  put_u8(out, untrusted_started);

  for (const CoreCtx& cc : ctx) {
    put_u64(out, cc.pc);
    put_u64(out, cc.last_result);
    put_u64(out, cc.work_cursor);
    const MonitorCtx& m = cc.mon;
    put_u8(out, static_cast<uint8_t>(m.phase));
    put_u64(out, m.substep);
    put_u64(out, m.target_zone);
    put_u64(out, m.smc_id);
    put_u64(out, m.exit_result);
    put_u64(out, m.service_left);
    put_u64(out, m.zone_pc);
    put_u8(out, m.awaiting_reply);
    put_u8(out, static_cast<uint8_t>(m.reply_phase));
    put_u8(out, m.exiting);
    put_u64(out, m.guess_next);
    put_u64(out, m.guess_limit);
    put_u8(out, m.guess_active);
    put_u8(out, m.guess_succeeded);
    put_u64(out, m.guess_count);
    put_u8(out, m.woke_parked);
    put_u8(out, static_cast<uint8_t>(m.last_reply));
  }

  put_u64(out, machine.memory.words.size());
  for (const auto& [k, v] : machine.memory.words) {
    put_u64(out, k);
    put_u64(out, v);
  }
  return out;
}

bool run_fixed(Sim& sim, uint64_t seed, uint64_t max_steps) {
  Prng rng(seed);
  for (uint64_t i = 0; i < max_steps; ++i) {
    if (sim.all_done()) return true;
    std::vector<int> actors = sim.runnable_actors();
    if (actors.empty()) return false;  // deadlock
    sim.step(actors[rng.below(actors.size())]);
  }
  return sim.all_done();
}

bool run_round_robin(Sim& sim, uint64_t max_steps) {
  size_t cursor = 0;
  for (uint64_t i = 0; i < max_steps; ++i) {
    if (sim.all_done()) return true;
    std::vector<int> actors = sim.runnable_actors();
    if (actors.empty()) return false;
    sim.step(actors[cursor++ % actors.size()]);
  }
  return sim.all_done();
}

}  // namespace rezone
