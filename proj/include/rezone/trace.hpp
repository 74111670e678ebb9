#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rezone/mem_topology.hpp"

namespace rezone {

/// World-switch protocol phases. Entry chain:
///   IDLE -> SYNC_HALT -> FLUSH(A) -> [TLBI(B)] -> UNLOCK(C) -> RECONF(D)
///        -> MMU_OFF(E) -> IN_ZONE
/// (B present iff the target differs from the last zone). Exit chain:
///   IN_ZONE -> EXIT_INVALIDATE(F) -> UNLOCK(C) -> RECONF_BACK(D')
///           -> RELOCK(C') -> MMU_ON(E') -> RESUME -> IDLE
enum class Phase : uint8_t {
  Idle,
  SyncHalt,
  Flush,           // A
  Tlbi,            // B
  Unlock,          // C
  Reconf,          // D
  MmuOff,          // E
  InZone,
  ExitInvalidate,  // F
  ReconfBack,      // D'
  Relock,          // C'
  MmuOn,           // E'
  Resume,
  Boot,            // pre-scheduling setup, used for cost attribution only
};

std::string to_string(Phase p);

enum class EventKind : uint8_t {
  Mem,        // bus/cache access
  Flush,      // cache flush, carries line count
  Tlbi,
  Coherency,
  PpcCheck,
  PpcConfig,
  MqSend,
  MqReply,
  AuthFail,
  PhaseEvt,   // phase transition
  Smc,
  Lock,       // rz_lock acquire/release
  Ipi,
  Halted,     // a halted core was scheduled (fixed scheduler only)
  Ctx,        // register context save/restore
  Integrity,  // trampoline content check at EL3 fetch points
  Work,       // in-zone workload units
  TokenTrap,  // token_reg read attempted below EL3
  BootEvt,
};

enum class MemVerdict : uint8_t {
  HitValue,
  HitSilentWrite,   // write absorbed by a cache line, no bus check
  MissFilled,
  Bypass,           // uncached access straight to the bus
  FaultTzasc,
  FaultPpc,
  FaultUnmapped,
  FaultTlbWalkBlocked,
};

std::string to_string(MemVerdict v);

enum class MqKind : uint8_t { UnlockPpc, LockPpc, Ack, Nack };

std::string to_string(MqKind k);

/// One trace record. A flat struct rather than a variant: the log is the
/// artifact's main external interface and every consumer (cost model,
/// property monitor, replayer) wants cheap uniform access.
struct TraceEvent {
  uint64_t seq = 0;
  int actor = -1;            // core id, or kGatekeeperActor
  Phase phase = Phase::Idle; // phase of the issuing context
  EventKind kind = EventKind::Mem;

  // Mem
  PhysAddr pa = 0;
  bool ns = false;
  El el = El::EL1;
  World world = World::Normal;
  bool is_write = false;
  bool is_fetch = false;
  MemVerdict verdict = MemVerdict::HitValue;
  RegionKind region;         // valid when the address mapped to a region
  bool has_region = false;

  // Flush / Work
  uint32_t count = 0;

  // Coherency / PpcConfig / Integrity / Lock
  bool flag = false;         // on/applied/ok/acquired

  // PpcCheck / PpcConfig
  int mid = -1;
  std::string detail;        // edit or check description

  // Mq
  MqKind mq = MqKind::Ack;

  // Smc / Ctx / Ipi / Lock
  uint64_t value = 0;        // smc id, ipi target, lock holder
};

inline constexpr int kGatekeeperActor = 100;

/// Append-only event log; append order is simulation order. When `retain` is
/// false the simulator truncates each step's events after evaluating them, so
/// exploration does not pay for trace growth.
struct TraceLog {
  std::vector<TraceEvent> events;
  uint64_t next_seq = 0;
  bool retain = true;

  TraceEvent& emit(TraceEvent ev) {
    ev.seq = next_seq++;
    events.push_back(std::move(ev));
    return events.back();
  }

  void clear() {
    events.clear();
    next_seq = 0;
  }
};

/// One line per event, fixed field order; byte-identical for identical runs.
std::string format_event(const TraceEvent& ev);

std::string format_log(const TraceLog& log);

}  // namespace rezone
