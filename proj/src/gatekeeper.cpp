#include "rezone/gatekeeper.hpp"

#include "rezone/errors.hpp"
#include "rezone/prng.hpp"

namespace rezone {

uint64_t hash_region(const Machine& m, RegionKind kind) {
  const Region& r = m.layout.find(kind);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (PhysAddr a = r.start; a < r.end(); a += kWordBytes) {
    uint64_t w = m.memory.load(a);
    for (int i = 0; i < 8; ++i) {
      h ^= (w >> (i * 8)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

GatekeeperState gk_boot(Machine& m, uint64_t rng_seed, int token_bits,
                        const FirmwareManifest& manifest, bool untrusted_step_taken) {
  if (untrusted_step_taken) {
    throw SimError(ErrorCode::BootOrderViolation,
                   "gatekeeper boot must precede any untrusted step");
  }
  // Secure boot: refuse to start on any firmware image mismatch.
  if (hash_region(m, RegionKind::monitor()) != manifest.monitor_hash ||
      hash_region(m, RegionKind::trampoline()) != manifest.trampoline_hash ||
      hash_region(m, RegionKind::gatekeeper()) != manifest.gatekeeper_hash) {
    throw SimError(ErrorCode::BootRefused, "firmware integrity check failed");
  }

  if (!m.ppc.initialized) ppc_boot_init(m.ppc, m.layout);

  GatekeeperState gk;
  gk.token_bits = token_bits;
  uint64_t mask = token_bits >= 64 ? ~0ULL : ((1ULL << token_bits) - 1);
  gk.token = Prng(rng_seed).next() & mask;
  gk.booted = true;

  // The token rests in gatekeeper-private memory and in each core's EL3-only
  // register; nowhere else.
  m.memory.store(m.layout.base_of(RegionKind::gatekeeper()) + kTokenStoreOffset, gk.token);
  for (CoreState& core : m.cluster.cores) {
    core.token_reg = gk.token;
  }

  TraceEvent ev;
  ev.actor = kGatekeeperActor;
  ev.phase = Phase::Boot;
  ev.kind = EventKind::BootEvt;
  ev.detail = "gk_boot";
  m.trace.emit(ev);
  return gk;
}

MqMessage gk_handle(GatekeeperState& gk, Machine& m, const MqMessage& msg, Phase phase) {
  // Receive on the MU_B interface (DID_1 side of the channel).
  ppc_check_traced(m.ppc, m.layout, kAcuMaster, RegionKind::gatekeeper(), Access::Read,
                   m.trace, kGatekeeperActor, phase);

  MqMessage reply;
  reply.channel = MqChannel::MuB;
  reply.sender_core = msg.sender_core;

  bool token_ok = gk.skip_token_check || msg.token_claim == gk.token;
  if (gk.force_nack_once) {
    token_ok = false;
    gk.force_nack_once = false;
  }

  if (!gk.booted || !token_ok ||
      (msg.kind != MqKind::UnlockPpc && msg.kind != MqKind::LockPpc)) {
    if (!token_ok) {
      ++gk.auth_failures;
      TraceEvent ev;
      ev.actor = kGatekeeperActor;
      ev.phase = phase;
      ev.kind = EventKind::AuthFail;
      m.trace.emit(ev);
    }
    reply.kind = MqKind::Nack;
    return reply;
  }

  if (msg.kind == MqKind::UnlockPpc) {
    // The unlock window is a DID_0 permission grant on the config port.
    ppc_write_config(m.ppc, m.layout, kAcuMaster, ConfigEdit::set_lock(false), m.trace,
                     phase);
    ppc_write_config(m.ppc, m.layout, kAcuMaster,
                     ConfigEdit::set_perm(kClusterDomain, RegionKind::ppc_mmio(),
                                          Permission::RW),
                     m.trace, phase);
  } else {
    ppc_write_config(m.ppc, m.layout, kAcuMaster,
                     ConfigEdit::set_perm(kClusterDomain, RegionKind::ppc_mmio(),
                                          Permission::NA),
                     m.trace, phase);
    ppc_write_config(m.ppc, m.layout, kAcuMaster, ConfigEdit::set_lock(true), m.trace,
                     phase);
  }
  reply.kind = MqKind::Ack;
  return reply;
}

}  // namespace rezone
