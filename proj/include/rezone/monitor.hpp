#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rezone/mq.hpp"
#include "rezone/trace.hpp"

namespace rezone {

struct Sim;

/// Per-core world-switch engine state. The protocol advances in scheduler
/// steps; consecutive phases with no possible inter-actor interaction are
/// executed within one step, but every transition emits a PHASE record.
struct MonitorCtx {
  Phase phase = Phase::Idle;
  int substep = 0;           // within SyncHalt: 0 = acquire, 1 = barrier wait
  uint16_t target_zone = 0;
  uint64_t smc_id = 0;
  uint64_t exit_result = 0;
  int service_left = 0;      // EL3 monitor-service steps remaining
  int zone_pc = 0;           // zone program counter while InZone
  bool awaiting_reply = false;
  Phase reply_phase = Phase::Unlock;  // phase to attribute the MQ reply to
  MqKind last_reply = MqKind::Nack;
  bool exiting = false;  // direction of the current Unlock phase

  // token-guess attack sub-state
  uint64_t guess_next = 0;
  uint64_t guess_limit = 0;
  bool guess_active = false;
  bool guess_succeeded = false;
  uint64_t guess_count = 0;

  bool woke_parked = false;  // sleeping core that woke mid-window

  bool last_reply_ack() const { return last_reply == MqKind::Ack; }
};

/// Monitor spin lock serializing zone execution across the cluster.
struct RzLock {
  int holder = -1;
  bool held() const { return holder >= 0; }
};

struct DispatchOutcome {
  enum class Kind { ZoneEntry, MonitorService, UnknownId } kind = Kind::UnknownId;
  uint16_t zone_id = 0;
};

/// SMC trap: saves context, fetches the EL3 vector, and routes the id.
/// Unknown ids return to the caller with a NACK result.
DispatchOutcome smc_dispatch(Sim& sim, int core_id, uint64_t smc_id);

/// Advances a core whose monitor engine is mid-protocol (phase not Idle /
/// InZone, or an EL3 service in progress) by one scheduler step.
void monitor_engine_step(Sim& sim, int core_id);

/// Begins the exit chain for the core currently running in a zone.
void zone_exit_begin(Sim& sim, int core_id, uint64_t result);

/// Wake path for a sleeping core: parks in read-only trampoline memory while
/// the cluster is inside a zone window, proceeds into monitor code otherwise.
void core_wake_step(Sim& sim, int core_id);

struct SafetyVerdict {
  bool safe = true;
  std::string reason;
};

/// Runs the sim under the given interleaving (choices index the runnable-actor
/// list, modulo its size), then round-robin to completion. SAFE iff no
/// violation of any kind was recorded, no honest core was denied an access,
/// and every core finished.
SafetyVerdict sync_scenario(Sim& sim, const std::vector<int>& schedule,
                            int max_steps = 4000);

}  // namespace rezone
