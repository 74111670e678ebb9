#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rezone/sim.hpp"

namespace rezone {

enum class AttackId : uint8_t {
  A1_Mapping,     // direct mapping of REE / monitor / other-zone memory
  A2_PpcHijack,   // PPC reconfiguration: direct write + token guessing
  A3_CacheLeak,   // residual cache data from normal world and other zones
  A4_CodeInject,  // poison cached trampoline lines, force an exit
  A5_TcbTamper,   // patch firmware images before boot
};

std::string to_string(AttackId id);

struct AttackOutcome {
  bool blocked = true;
  std::string note;
  std::vector<Violation> violations;  // empty when blocked
  uint64_t guess_attempts = 0;        // A2 statistics
};

/// Standard adversarial platform: two zones, canaries planted in REE,
/// MONITOR, ZONE(2) and GATEKEEPER, the attack program installed as zone 1's
/// trusted OS, a driver on core 0 and a canary-priming reader on core 1.
Sim make_attack_sim(AttackId id, const SimConfig& config,
                    uint64_t token_guess_limit = 256);

SimConfig default_attack_config();

/// Runs the attack under one seeded schedule. Blocked iff no property was
/// violated, no attacker-observable word equals a canary, the PPC
/// configuration returned to its boot state, and the trampoline image is
/// intact. A5 must be stopped by secure boot, not at runtime.
AttackOutcome run_attack(AttackId id, const SimConfig& config, uint64_t schedule_seed);

/// Bounded-exhaustive interleaving exploration (BFS, so recorded witnesses
/// are minimal). States are deduplicated on the canonical serialization.
struct ExplorationReport {
  uint64_t states_visited = 0;
  uint64_t branches = 0;
  int depth_reached = 0;
  bool budget_exceeded = false;
  bool deadlock_found = false;
  std::vector<Violation> violations;      // first witness per kind
  std::vector<int> witness_schedule;      // schedule prefix of the first witness
  std::set<Phase> phase_coverage;

  bool any_violation() const { return !violations.empty() || deadlock_found; }
  std::string to_text() const;
};

/// budget == 0 reads REZONE_SIM_BUDGET (default 2'000'000 states); exceeding
/// it throws SimError{BudgetExceeded} unless stop_on_violation already hit.
ExplorationReport explore(const Sim& initial, int depth, uint64_t budget = 0,
                          bool stop_on_violation = false);

/// Probe scenario tailored to demonstrate the given mutation's necessity:
/// exploring it with the mutation enabled yields a violation witness; with
/// the honest protocol it stays clean at the same depth.
Sim make_mutation_probe(const Mutations& mutations);

/// Sync-scenario fixtures (1..3) from the cross-core synchronization design.
Sim make_sync_scenario_sim(int scenario, int cores, const Mutations& mutations = {});

/// Token-guess trial: attacker enumerates UNLOCK claims against a k-bit
/// token. Returns the number of attempts of the first success (the attacker
/// is given enough budget to always succeed at small k).
uint64_t token_guess_attempts(int token_bits, uint64_t boot_seed);

}  // namespace rezone
