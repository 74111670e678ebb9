#include "rezone/trace.hpp"

#include <cinttypes>
#include <cstdio>

namespace rezone {

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "IDLE";
    case Phase::SyncHalt: return "SYNC_HALT";
    case Phase::Flush: return "FLUSH_A";
    case Phase::Tlbi: return "TLBI_B";
    case Phase::Unlock: return "UNLOCK_C";
    case Phase::Reconf: return "RECONF_D";
    case Phase::MmuOff: return "MMU_OFF_E";
    case Phase::InZone: return "IN_ZONE";
    case Phase::ExitInvalidate: return "INVAL_F";
    case Phase::ReconfBack: return "RECONF_D2";
    case Phase::Relock: return "RELOCK_C2";
    case Phase::MmuOn: return "MMU_ON_E2";
    case Phase::Resume: return "RESUME";
    case Phase::Boot: return "BOOT";
  }
  return "?";
}

std::string to_string(MemVerdict v) {
  switch (v) {
    case MemVerdict::HitValue: return "hit";
    case MemVerdict::HitSilentWrite: return "hit_silent_write";
    case MemVerdict::MissFilled: return "miss_filled";
    case MemVerdict::Bypass: return "bypass";
    case MemVerdict::FaultTzasc: return "fault_tzasc";
    case MemVerdict::FaultPpc: return "fault_ppc";
    case MemVerdict::FaultUnmapped: return "fault_unmapped";
    case MemVerdict::FaultTlbWalkBlocked: return "fault_tlb_walk";
  }
  return "?";
}

std::string to_string(MqKind k) {
  switch (k) {
    case MqKind::UnlockPpc: return "UNLOCK_PPC";
    case MqKind::LockPpc: return "LOCK_PPC";
    case MqKind::Ack: return "ACK";
    case MqKind::Nack: return "NACK";
  }
  return "?";
}

namespace {

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::Mem: return "MEM";
    case EventKind::Flush: return "FLUSH";
    case EventKind::Tlbi: return "TLBI";
    case EventKind::Coherency: return "COHERENCY";
    case EventKind::PpcCheck: return "PPC_CHECK";
    case EventKind::PpcConfig: return "PPC_CONFIG";
    case EventKind::MqSend: return "MQ_SEND";
    case EventKind::MqReply: return "MQ_REPLY";
    case EventKind::AuthFail: return "AUTH_FAIL";
    case EventKind::PhaseEvt: return "PHASE";
    case EventKind::Smc: return "SMC";
    case EventKind::Lock: return "LOCK";
    case EventKind::Ipi: return "IPI";
    case EventKind::Halted: return "HALTED";
    case EventKind::Ctx: return "CTX";
    case EventKind::Integrity: return "INTEGRITY";
    case EventKind::Work: return "WORK";
    case EventKind::TokenTrap: return "TOKEN_TRAP";
    case EventKind::BootEvt: return "BOOT";
  }
  return "?";
}

std::string actor_name(int actor) {
  if (actor == kGatekeeperActor) return "gk";
  return "c" + std::to_string(actor);
}

void append(std::string& out, const char* key, const std::string& val) {
  out += ' ';
  out += key;
  out += '=';
  out += val;
}

std::string hex(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%" PRIx64, v);
  return buf;
}

}  // namespace

std::string format_event(const TraceEvent& ev) {
  std::string out;
  out.reserve(96);
  out += "seq=" + std::to_string(ev.seq);
  append(out, "actor", actor_name(ev.actor));
  append(out, "phase", to_string(ev.phase));
  append(out, "kind", kind_name(ev.kind));
  switch (ev.kind) {
    case EventKind::Mem:
      append(out, "pa", hex(ev.pa));
      append(out, "ns", ev.ns ? "1" : "0");
      append(out, "el", ev.el == El::EL3 ? "EL3" : (ev.el == El::EL1 ? "EL1" : "EL0"));
      append(out, "world", ev.world == World::Normal ? "N" : "S");
      append(out, "access", ev.is_fetch ? "x" : (ev.is_write ? "w" : "r"));
      append(out, "verdict", to_string(ev.verdict));
      if (ev.has_region) append(out, "region", to_string(ev.region));
      break;
    case EventKind::Flush:
      append(out, "lines", std::to_string(ev.count));
      break;
    case EventKind::Coherency:
      append(out, "on", ev.flag ? "1" : "0");
      break;
    case EventKind::PpcCheck:
      append(out, "mid", std::to_string(ev.mid));
      if (ev.has_region) append(out, "region", to_string(ev.region));
      append(out, "access", ev.is_write ? "w" : "r");
      append(out, "verdict", ev.flag ? "allow" : "deny");
      break;
    case EventKind::PpcConfig:
      append(out, "requester", std::to_string(ev.mid));
      append(out, "edit", ev.detail);
      append(out, "applied", ev.flag ? "1" : "0");
      break;
    case EventKind::MqSend:
    case EventKind::MqReply:
      append(out, "msg", to_string(ev.mq));
      break;
    case EventKind::PhaseEvt:
      append(out, "to", ev.detail);
      break;
    case EventKind::Smc:
      append(out, "id", std::to_string(ev.value));
      break;
    case EventKind::Lock:
      append(out, "holder", ev.flag ? std::to_string(static_cast<int64_t>(ev.value)) : "-");
      break;
    case EventKind::Ipi:
      append(out, "to", "c" + std::to_string(ev.value));
      break;
    case EventKind::Ctx:
      append(out, "dir", ev.flag ? "restore" : "save");
      break;
    case EventKind::Integrity:
      append(out, "ok", ev.flag ? "1" : "0");
      break;
    case EventKind::Work:
      append(out, "units", std::to_string(ev.count));
      break;
    case EventKind::Tlbi:
    case EventKind::AuthFail:
    case EventKind::Halted:
    case EventKind::TokenTrap:
      break;
    case EventKind::BootEvt:
      append(out, "what", ev.detail);
      break;
  }
  return out;
}

std::string format_log(const TraceLog& log) {
  std::string out;
  for (const TraceEvent& ev : log.events) {
    out += format_event(ev);
    out += '\n';
  }
  return out;
}

}  // namespace rezone
