#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rezone/cpu_cluster.hpp"
#include "rezone/gatekeeper.hpp"
#include "rezone/monitor.hpp"
#include "rezone/ppc.hpp"
#include "rezone/zone_manager.hpp"

namespace rezone {

/// Attacker actions run at S.EL1/S.EL0 inside a zone; normal-world actions at
/// NS.EL1. One action per scheduler step (Guess spans several).
struct Action {
  enum class Kind : uint8_t {
    // normal world
    Smc,
    Read,         // a = physical address (identity, NS=1)
    Write,        // a = address, b = value
    Wfi,
    // zone world
    Map,          // a = va, b = pa, c = ns, d = writable
    ReadVa,       // a = va
    WriteVa,      // a = va, b = value
    Work,         // a = units; writes one private word per unit
    SendMq,       // mq_kind, a = claim, c = channel (0 = MU_A, 1 = MU_B)
    Guess,        // a = max attempts; enumerates UNLOCK claims from 0
    PpcEdit,      // edit
    ReadToken,    // token_reg read attempt (traps below EL3)
    ZoneExit,     // a = result
  } kind = Kind::Read;

  uint64_t a = 0, b = 0, c = 0, d = 0;
  ConfigEdit edit;
  MqKind mq_kind = MqKind::UnlockPpc;

  static Action smc(uint64_t id) { return {Kind::Smc, id}; }
  static Action read(uint64_t addr) { return {Kind::Read, addr}; }
  static Action write(uint64_t addr, uint64_t val) { return {Kind::Write, addr, val}; }
  static Action wfi() { return {Kind::Wfi}; }
  static Action map(uint64_t va, uint64_t pa, bool ns, bool writable) {
    return {Kind::Map, va, pa, ns ? 1u : 0u, writable ? 1u : 0u};
  }
  static Action read_va(uint64_t va) { return {Kind::ReadVa, va}; }
  static Action write_va(uint64_t va, uint64_t val) { return {Kind::WriteVa, va, val}; }
  static Action work(uint64_t units) { return {Kind::Work, units}; }
  static Action send_mq(MqKind k, uint64_t claim, MqChannel ch = MqChannel::MuA) {
    Action act{Kind::SendMq, claim, 0, ch == MqChannel::MuB ? 1u : 0u};
    act.mq_kind = k;
    return act;
  }
  static Action guess(uint64_t limit) { return {Kind::Guess, limit}; }
  static Action ppc_edit(const ConfigEdit& e) {
    Action act{Kind::PpcEdit};
    act.edit = e;
    return act;
  }
  static Action read_token() { return {Kind::ReadToken}; }
  static Action zone_exit(uint64_t result) { return {Kind::ZoneExit, result}; }
};

using Program = std::vector<Action>;

/// Protocol-step mutations for minimality testing. Each disables exactly one
/// defense; the honest configuration has all of them off.
struct Mutations {
  bool skip_flush = false;            // step A
  bool skip_unlock = false;           // step C (gatekeeper unlock request)
  bool skip_reconf = false;           // step D (zone row application)
  bool skip_mmu_off = false;          // step E (EL3 MMU stays on)
  bool skip_exit_invalidate = false;  // step F
  bool skip_token_check = false;      // gatekeeper accepts any claim
  bool skip_coherency_off = false;
  bool skip_halt = false;
  bool skip_wake_ro = false;          // sleeping cores wake into monitor code

  bool any() const {
    return skip_flush || skip_unlock || skip_reconf || skip_mmu_off ||
           skip_exit_invalidate || skip_token_check || skip_coherency_off ||
           skip_halt || skip_wake_ro;
  }
};

enum class SecurityMode : uint8_t {
  NoRz,  // plain TrustZone: SMC switches worlds with no zone protections
  Rz,
};

struct SimConfig {
  LayoutConfig layout;
  ClusterConfig cluster;
  int token_bits = 64;
  uint64_t boot_seed = 1;
  bool plant_canaries = true;
  SecurityMode mode = SecurityMode::Rz;
  Mutations mutations;
};

struct Violation {
  enum class Kind : uint8_t { P1, P2, P3, Safety } kind = Kind::P1;
  std::string detail;
  uint64_t seq = 0;  // trace seq of the offending event
};

std::string to_string(Violation::Kind k);

/// Per-core software context: program interpreter position plus the monitor
/// engine state.
struct CoreCtx {
  int pc = 0;
  uint64_t last_result = 0;
  uint64_t work_cursor = 0;
  MonitorCtx mon;
};

inline constexpr uint64_t kCanaryOffset = 0x100;
inline constexpr uint64_t kUnknownSmcResult = 0xDEADC0DEULL;

/// The whole simulated platform: hardware, firmware state, programs, and the
/// cooperative scheduler's bookkeeping. Value type; clones are independent
/// (the exploration harness copies freely).
struct Sim {
  SimConfig config;
  ZoneRegistry registry;
  Machine machine;
  GatekeeperState gk;
  RzLock rz_lock;

  std::vector<Program> normal_programs;          // per core
  std::map<uint16_t, Program> zone_programs;
  std::map<uint16_t, bool> zone_honest;          // attacker zones are false
  std::vector<CoreCtx> ctx;

  bool boot_done = false;
  bool untrusted_started = false;
  std::optional<uint16_t> active_zone;

  FirmwareManifest manifest;
  std::vector<uint64_t> pristine_trampoline;     // install-time snapshot
  uint64_t canary_values[4] = {0, 0, 0, 0};      // REE, MONITOR, ZONE(2), GK

  std::map<uint16_t, std::set<uint64_t>> zone_observed;
  std::vector<std::set<uint64_t>> core_observed;

  std::vector<Violation> violations;
  uint64_t steps_taken = 0;

  // --- construction ---------------------------------------------------
  static Sim build(const SimConfig& config, const std::vector<ZoneManifest>& zones);

  void set_normal_program(int core, Program p) { normal_programs[core] = std::move(p); }
  void set_zone_program(uint16_t zone, Program p, bool honest = true) {
    zone_programs[zone] = std::move(p);
    zone_honest[zone] = honest;
  }

  /// A5 surface: tamper with an installed firmware image before boot.
  void pre_boot_patch(RegionKind region, uint64_t offset, uint64_t value);

  /// Secure boot; throws SimError{BootRefused} on image mismatch.
  void boot();

  // --- scheduling -----------------------------------------------------
  std::vector<int> runnable_actors() const;  // core ids, then kGatekeeperActor
  bool all_done() const;
  bool core_done(int core) const;

  /// One cooperative step of the given actor. Emits trace events, evaluates
  /// the security properties over them, truncates the log afterwards when
  /// trace.retain is false.
  void step(int actor);

  // --- helpers used across the monitor / adversary modules -------------
  CoreState& core(int id) { return machine.cluster.cores[id]; }
  const CoreState& core(int id) const { return machine.cluster.cores[id]; }
  uint64_t canary(int idx) const { return canary_values[idx]; }
  PhysAddr region_base(RegionKind k) const { return machine.layout.base_of(k); }
  uint64_t trampoline_vector_pa() const { return region_base(RegionKind::trampoline()); }

  /// EL3 instruction fetch of the trampoline vector line; models the
  /// TLB-walk and cache-injection hazards and records an INTEGRITY event.
  /// Returns false if the fetch faulted (core hung).
  bool el3_vector_fetch(int core_id, Phase phase);

  void observe(int core_id, uint64_t value);

  /// MU send from zone context: auto-maps the doorbell page, issues the bus
  /// write, blocks on MU_A until the gatekeeper replies. MU_B sends fault.
  void send_zone_mq(int core_id, MqKind kind, uint64_t claim, MqChannel channel);
  void ensure_zone_mapping(int core_id, PhysAddr pa, bool ns);
  bool zone_honest_at(uint16_t zone) const;

  /// Canonical byte serialization of all behavior-relevant state (trace,
  /// violations, and observation sets excluded). Exploration dedup key.
  std::string state_key() const;

  void install_images();
  void run_program_action(int core_id);
  void run_zone_action(int core_id);
  void evaluate_step(size_t first_event);
};

/// Seeded-random scheduling to completion (or step cap). Returns true when
/// every program finished.
bool run_fixed(Sim& sim, uint64_t seed, uint64_t max_steps = 100000);

/// Deterministic round-robin over runnable actors.
bool run_round_robin(Sim& sim, uint64_t max_steps = 100000);

}  // namespace rezone
