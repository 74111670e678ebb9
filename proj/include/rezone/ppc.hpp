#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rezone/mem_topology.hpp"
#include "rezone/trace.hpp"
#include "rezone/zone_manager.hpp"

namespace rezone {

/// Bus masters. The application cluster and the ACU always exist; further
/// masters (DMA, GPU, ...) are optional and excluded from security claims.
inline constexpr int kClusterMaster = 0;  // MID_0
inline constexpr int kAcuMaster = 1;      // MID_1

inline constexpr int kClusterDomain = 0;  // DID_0
inline constexpr int kAcuDomain = 1;      // DID_1

enum class Access : uint8_t { Read, Write };

struct ConfigEdit {
  enum class Kind : uint8_t { SetPerm, Bind, Unbind, SetLock } kind = Kind::SetPerm;
  int did = 0;
  RegionKind resource;     // SetPerm
  Permission perm = Permission::NA;
  int mid = 0;             // Bind/Unbind
  bool lock = false;       // SetLock

  static ConfigEdit set_perm(int did, RegionKind r, Permission p) {
    ConfigEdit e;
    e.kind = Kind::SetPerm;
    e.did = did;
    e.resource = r;
    e.perm = p;
    return e;
  }
  static ConfigEdit bind(int mid, int did) {
    ConfigEdit e;
    e.kind = Kind::Bind;
    e.mid = mid;
    e.did = did;
    return e;
  }
  static ConfigEdit unbind(int mid, int did) {
    ConfigEdit e;
    e.kind = Kind::Unbind;
    e.mid = mid;
    e.did = did;
    return e;
  }
  static ConfigEdit set_lock(bool on) {
    ConfigEdit e;
    e.kind = Kind::SetLock;
    e.lock = on;
    return e;
  }

  std::string describe() const;
};

/// Platform Partition Controller state: per-(domain, resource) permissions,
/// bus-master bindings, and the config-port lock. Permissions are checked at
/// bus level only; the controller never sees cache hits and never
/// distinguishes cores within the cluster.
struct PpcState {
  int max_domains = 4;
  // perms[did][resource_index]
  std::vector<std::vector<Permission>> perms;
  // bindings[mid] = bitmask of domains
  std::vector<uint32_t> bindings;
  bool locked = true;
  bool initialized = false;

  Permission perm(const MemoryLayout& layout, int did, RegionKind r) const {
    return perms[did][layout.resource_index(r)];
  }
};

/// Boot-time domain setup: DID_0 = cluster domain carrying the MONITOR row,
/// DID_1 = ACU domain (PPC_MMIO + GATEKEEPER RW), cluster bound to DID_0, ACU
/// to DID_1, config port locked. Throws SimError{DoubleInit} on reuse.
void ppc_boot_init(PpcState& state, const MemoryLayout& layout);

/// True iff some domain bound to `mid` grants at least `access` on `region`.
/// Pure. Throws SimError{UnknownMaster} for unbound masters.
bool ppc_check(const PpcState& state, const MemoryLayout& layout, int mid,
               RegionKind region, Access access);

/// Same, with a PPC_CHECK trace record.
bool ppc_check_traced(const PpcState& state, const MemoryLayout& layout, int mid,
                      RegionKind region, Access access, TraceLog& trace,
                      int actor, Phase phase);

/// Applies `edit` iff the requester can write the config port; otherwise the
/// state is untouched and a denied PPC_CONFIG record is emitted (silent-deny
/// bus semantics). Returns whether the edit was applied.
bool ppc_write_config(PpcState& state, const MemoryLayout& layout, int requester,
                      const ConfigEdit& edit, TraceLog& trace, Phase phase);

/// Sets DID_0's permissions to exactly the ZONE(zone) reference row /
/// MONITOR reference row. Issued as individual set_perm edits on behalf of
/// `requester`; the PPC_MMIO cell is written last because the row closes the
/// unlock window. Returns false if any edit was denied.
bool apply_zone_row(PpcState& state, const ZoneManifest& zone,
                    const MemoryLayout& layout, TraceLog& trace,
                    int requester = kClusterMaster, Phase phase = Phase::Reconf);
bool apply_monitor_row(PpcState& state, const MemoryLayout& layout, TraceLog& trace,
                       int requester = kClusterMaster, Phase phase = Phase::ReconfBack);

}  // namespace rezone
