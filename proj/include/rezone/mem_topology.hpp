#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rezone {

using PhysAddr = uint64_t;

enum class RegionTag : uint8_t {
  Ree,
  Shared,
  Monitor,
  Trampoline,
  Gatekeeper,
  Zone,        // id = zone id, 1..n
  PpcMmio,
  Peripheral,  // id = peripheral id, 1..p
};

/// A region kind. Zone and Peripheral carry a dense 1-based id; the id is 0
/// for the singleton kinds.
struct RegionKind {
  RegionTag tag = RegionTag::Ree;
  uint16_t id = 0;

  static RegionKind ree() { return {RegionTag::Ree, 0}; }
  static RegionKind shared() { return {RegionTag::Shared, 0}; }
  static RegionKind monitor() { return {RegionTag::Monitor, 0}; }
  static RegionKind trampoline() { return {RegionTag::Trampoline, 0}; }
  static RegionKind gatekeeper() { return {RegionTag::Gatekeeper, 0}; }
  static RegionKind zone(uint16_t id) { return {RegionTag::Zone, id}; }
  static RegionKind ppc_mmio() { return {RegionTag::PpcMmio, 0}; }
  static RegionKind peripheral(uint16_t id) { return {RegionTag::Peripheral, id}; }

  bool operator==(const RegionKind& o) const { return tag == o.tag && id == o.id; }
  bool operator!=(const RegionKind& o) const { return !(*this == o); }
};

std::string to_string(RegionKind kind);

/// Requests tagged non-secure (NS=1) may only reach non-secure regions; this
/// is what the TZASC partitions on. Peripherals are secure-side: the normal
/// world row of the permission matrix denies them.
bool region_is_secure(RegionKind kind);

struct Region {
  PhysAddr start = 0;
  uint64_t length = 0;  // half-open [start, start + length)
  RegionKind kind;

  bool contains(PhysAddr a) const { return a >= start && a < start + length; }
  PhysAddr end() const { return start + length; }
};

struct LayoutConfig {
  uint64_t address_space = 16 * 1024 * 1024;
  uint64_t ree_size = 1024 * 1024;
  uint64_t shared_size = 64 * 1024;
  uint64_t trampoline_size = 4 * 1024;
  uint64_t monitor_size = 64 * 1024;
  uint64_t gatekeeper_size = 16 * 1024;
  uint64_t ppc_mmio_size = 4 * 1024;
  uint64_t peripheral_size = 4 * 1024;
  uint16_t peripheral_count = 8;
};

/// Physical memory partition. Regions are pairwise disjoint, sorted by start
/// address, with exactly one region per singleton kind.
struct MemoryLayout {
  std::vector<Region> regions;
  uint64_t address_space = 0;
  uint16_t zone_count = 0;
  uint16_t peripheral_count = 0;

  const Region& find(RegionKind kind) const;
  PhysAddr base_of(RegionKind kind) const { return find(kind).start; }

  /// Compact index for (domain, resource) permission tables:
  /// [Ree, Shared, Monitor, Trampoline, Gatekeeper, PpcMmio, Zone(1..n),
  /// Peripheral(1..p)].
  int resource_index(RegionKind kind) const;
  int resource_count() const { return 6 + zone_count + peripheral_count; }
  RegionKind resource_at(int index) const;
};

enum class Permission : uint8_t { NA = 0, RO = 1, RW = 2 };

inline bool grants_read(Permission p) { return p >= Permission::RO; }
inline bool grants_write(Permission p) { return p == Permission::RW; }

std::string to_string(Permission p);

enum class World : uint8_t { Normal, Secure };
enum class El : uint8_t { EL0, EL1, EL3 };

/// The matrix row selector: which software context the cluster is in.
/// EL3 is always secure; an active zone applies cluster-wide.
struct AccessContext {
  World world = World::Normal;
  El el = El::EL1;
  std::optional<uint16_t> active_zone;
  bool ppc_unlocked_window = false;

  static AccessContext normal() { return {World::Normal, El::EL1, {}, false}; }
  static AccessContext monitor(bool window = false) {
    return {World::Secure, El::EL3, {}, window};
  }
  static AccessContext zone_active(uint16_t z, El el = El::EL1) {
    return {World::Secure, el, z, false};
  }
};

struct ZoneManifest;  // zone_manager.hpp

/// Builds the canonical layout: regions packed back to back from address 0 in
/// the order REE, SHARED, TRAMPOLINE, MONITOR, GATEKEEPER, ZONE(1..n),
/// PPC_MMIO, PERIPHERAL(1..p).
/// Throws SimError{Overlap} if the regions do not fit the address space and
/// SimError{DuplicateZoneId} on repeated zone ids.
MemoryLayout build_layout(const std::vector<ZoneManifest>& manifests,
                          const LayoutConfig& config = {});

/// Region lookup; nullopt for addresses between or past regions.
std::optional<RegionKind> region_of(const MemoryLayout& layout, PhysAddr addr);

/// The reference permission matrix. Pure oracle, independent of the PPC
/// machinery that enforces it:
///   NORMAL row:  REE/SHARED RW, everything else NA.
///   MONITOR row: RW everywhere except GATEKEEPER (NA) and PPC_MMIO (NA
///                unless the unlock window is open).
///   ZONE(i) row: ZONE(i)/SHARED RW, TRAMPOLINE RO, whitelisted peripherals
///                RW, everything else NA.
Permission reference_permission(const AccessContext& ctx, RegionKind kind,
                                const std::set<uint16_t>& peripheral_whitelist = {});

}  // namespace rezone
