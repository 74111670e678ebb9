#pragma once

#include <cstdint>

#include "rezone/cpu_cluster.hpp"
#include "rezone/mq.hpp"

namespace rezone {

/// ACU-resident reference monitor. Owns the PPC config port and the shared
/// boot token; serves authenticated lock/unlock requests from the MU.
struct GatekeeperState {
  uint64_t token = 0;
  int token_bits = 64;
  bool booted = false;
  uint32_t auth_failures = 0;  // counted, no lockout policy imposed
  bool skip_token_check = false;  // mutation: accept any claim
  bool force_nack_once = false;   // test hook: refuse the next valid request
};

/// Secure boot: verifies firmware images against the install-time manifest,
/// initializes the PPC domains if not already done, generates the token from
/// the seeded PRNG, stores it in gatekeeper-private memory and in every
/// core's EL3 token register.
///
/// Throws SimError{BootOrderViolation} if an untrusted step already ran and
/// SimError{BootRefused} if an image hash does not match the manifest.
struct FirmwareManifest {
  uint64_t monitor_hash = 0;
  uint64_t trampoline_hash = 0;
  uint64_t gatekeeper_hash = 0;
};

GatekeeperState gk_boot(Machine& m, uint64_t rng_seed, int token_bits,
                        const FirmwareManifest& manifest,
                        bool untrusted_step_taken);

/// Handles one MU request and produces the reply:
///   UNLOCK_PPC + correct token -> opens the DID_0 window on PPC_MMIO, ACK.
///   LOCK_PPC   + correct token -> closes it, ACK.
///   wrong token                -> NACK, AUTH_FAIL recorded, state unchanged.
MqMessage gk_handle(GatekeeperState& gk, Machine& m, const MqMessage& msg,
                    Phase phase);

/// FNV-1a over a region's backing words; the firmware image/integrity hash.
uint64_t hash_region(const Machine& m, RegionKind kind);

/// Offset of the token word inside the gatekeeper region.
inline constexpr uint64_t kTokenStoreOffset = 8;

}  // namespace rezone
