#include "rezone/ppc.hpp"

#include "rezone/errors.hpp"

namespace rezone {

std::string ConfigEdit::describe() const {
  switch (kind) {
    case Kind::SetPerm:
      return "set_perm(d" + std::to_string(did) + "," + to_string(resource) + "," +
             to_string(perm) + ")";
    case Kind::Bind:
      return "bind(m" + std::to_string(mid) + ",d" + std::to_string(did) + ")";
    case Kind::Unbind:
      return "unbind(m" + std::to_string(mid) + ",d" + std::to_string(did) + ")";
    case Kind::SetLock:
      return std::string("set_lock(") + (lock ? "1" : "0") + ")";
  }
  return "?";
}

void ppc_boot_init(PpcState& s, const MemoryLayout& layout) {
  if (s.initialized) {
    throw SimError(ErrorCode::DoubleInit, "PPC domains are configured once, at secure boot");
  }
  s.perms.assign(s.max_domains, std::vector<Permission>(layout.resource_count(), Permission::NA));
  s.bindings.assign(8, 0);

  // DID_0: the cluster domain, booted with the MONITOR row.
  for (int i = 0; i < layout.resource_count(); ++i) {
    RegionKind r = layout.resource_at(i);
    s.perms[kClusterDomain][i] =
        reference_permission(AccessContext::monitor(), r);
  }
  // DID_1: the ACU domain; config port and gatekeeper memory only.
  s.perms[kAcuDomain][layout.resource_index(RegionKind::ppc_mmio())] = Permission::RW;
  s.perms[kAcuDomain][layout.resource_index(RegionKind::gatekeeper())] = Permission::RW;

  s.bindings[kClusterMaster] = 1u << kClusterDomain;
  s.bindings[kAcuMaster] = 1u << kAcuDomain;
  s.locked = true;
  s.initialized = true;
}

bool ppc_check(const PpcState& state, const MemoryLayout& layout, int mid,
               RegionKind region, Access access) {
  if (mid < 0 || mid >= static_cast<int>(state.bindings.size()) ||
      state.bindings[mid] == 0) {
    throw SimError(ErrorCode::UnknownMaster, "bus master " + std::to_string(mid) +
                                                 " is bound to no domain");
  }
  int res = layout.resource_index(region);
  uint32_t mask = state.bindings[mid];
  for (int did = 0; did < state.max_domains; ++did) {
    if (!(mask & (1u << did))) continue;
    Permission p = state.perms[did][res];
    if (access == Access::Read ? grants_read(p) : grants_write(p)) return true;
  }
  return false;
}

bool ppc_check_traced(const PpcState& state, const MemoryLayout& layout, int mid,
                      RegionKind region, Access access, TraceLog& trace,
                      int actor, Phase phase) {
  bool allow = ppc_check(state, layout, mid, region, access);
  TraceEvent ev;
  ev.actor = actor;
  ev.phase = phase;
  ev.kind = EventKind::PpcCheck;
  ev.mid = mid;
  ev.region = region;
  ev.has_region = true;
  ev.is_write = access == Access::Write;
  ev.flag = allow;
  trace.emit(ev);
  return allow;
}

namespace {

void apply_edit(PpcState& state, const MemoryLayout& layout, const ConfigEdit& edit) {
  switch (edit.kind) {
    case ConfigEdit::Kind::SetPerm:
      state.perms[edit.did][layout.resource_index(edit.resource)] = edit.perm;
      break;
    case ConfigEdit::Kind::Bind:
      state.bindings[edit.mid] |= 1u << edit.did;
      break;
    case ConfigEdit::Kind::Unbind:
      state.bindings[edit.mid] &= ~(1u << edit.did);
      break;
    case ConfigEdit::Kind::SetLock:
      state.locked = edit.lock;
      break;
  }
}

}  // namespace

bool ppc_write_config(PpcState& state, const MemoryLayout& layout, int requester,
                      const ConfigEdit& edit, TraceLog& trace, Phase phase) {
  bool allow = ppc_check(state, layout, requester, RegionKind::ppc_mmio(), Access::Write);
  if (allow) apply_edit(state, layout, edit);

  TraceEvent ev;
  ev.actor = requester == kAcuMaster ? kGatekeeperActor : requester;
  ev.phase = phase;
  ev.kind = EventKind::PpcConfig;
  ev.mid = requester;
  ev.detail = edit.describe();
  ev.flag = allow;
  trace.emit(ev);
  return allow;
}

namespace {

bool apply_row(PpcState& state, const MemoryLayout& layout, const AccessContext& row,
               const std::set<uint16_t>& whitelist, TraceLog& trace, int requester,
               Phase phase) {
  bool all_ok = true;
  int ppc_idx = layout.resource_index(RegionKind::ppc_mmio());
  // PPC_MMIO last: the row carries NA for it, which closes the window.
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < layout.resource_count(); ++i) {
      if ((i == ppc_idx) != (pass == 1)) continue;
      RegionKind r = layout.resource_at(i);
      Permission p = reference_permission(row, r, whitelist);
      all_ok &= ppc_write_config(state, layout, requester,
                                 ConfigEdit::set_perm(kClusterDomain, r, p), trace, phase);
    }
  }
  return all_ok;
}

}  // namespace

bool apply_zone_row(PpcState& state, const ZoneManifest& zone, const MemoryLayout& layout,
                    TraceLog& trace, int requester, Phase phase) {
  return apply_row(state, layout, AccessContext::zone_active(zone.zone_id),
                   zone.peripheral_whitelist, trace, requester, phase);
}

bool apply_monitor_row(PpcState& state, const MemoryLayout& layout, TraceLog& trace,
                       int requester, Phase phase) {
  return apply_row(state, layout, AccessContext::monitor(), {}, trace, requester, phase);
}

}  // namespace rezone
