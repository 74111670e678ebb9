#include "rezone/mem_topology.hpp"

#include <algorithm>
#include <set>

#include "rezone/errors.hpp"
#include "rezone/zone_manager.hpp"

namespace rezone {

std::string to_string(RegionKind kind) {
  switch (kind.tag) {
    case RegionTag::Ree: return "REE";
    case RegionTag::Shared: return "SHARED";
    case RegionTag::Monitor: return "MONITOR";
    case RegionTag::Trampoline: return "TRAMPOLINE";
    case RegionTag::Gatekeeper: return "GATEKEEPER";
    case RegionTag::Zone: return "ZONE" + std::to_string(kind.id);
    case RegionTag::PpcMmio: return "PPC_MMIO";
    case RegionTag::Peripheral: return "PERIPH" + std::to_string(kind.id);
  }
  return "?";
}

std::string to_string(Permission p) {
  switch (p) {
    case Permission::NA: return "NA";
    case Permission::RO: return "RO";
    case Permission::RW: return "RW";
  }
  return "?";
}

bool region_is_secure(RegionKind kind) {
  switch (kind.tag) {
    case RegionTag::Ree:
    case RegionTag::Shared:
      return false;
    default:
      return true;
  }
}

const Region& MemoryLayout::find(RegionKind kind) const {
  for (const Region& r : regions) {
    if (r.kind == kind) return r;
  }
  throw SimError(ErrorCode::Overlap, "no region of kind " + to_string(kind));
}

int MemoryLayout::resource_index(RegionKind kind) const {
  switch (kind.tag) {
    case RegionTag::Ree: return 0;
    case RegionTag::Shared: return 1;
    case RegionTag::Monitor: return 2;
    case RegionTag::Trampoline: return 3;
    case RegionTag::Gatekeeper: return 4;
    case RegionTag::PpcMmio: return 5;
    case RegionTag::Zone: return 6 + (kind.id - 1);
    case RegionTag::Peripheral: return 6 + zone_count + (kind.id - 1);
  }
  return -1;
}

RegionKind MemoryLayout::resource_at(int index) const {
  static const RegionKind singles[6] = {
      RegionKind::ree(),        RegionKind::shared(),  RegionKind::monitor(),
      RegionKind::trampoline(), RegionKind::gatekeeper(), RegionKind::ppc_mmio()};
  if (index < 6) return singles[index];
  index -= 6;
  if (index < zone_count) return RegionKind::zone(static_cast<uint16_t>(index + 1));
  index -= zone_count;
  return RegionKind::peripheral(static_cast<uint16_t>(index + 1));
}

MemoryLayout build_layout(const std::vector<ZoneManifest>& manifests,
                          const LayoutConfig& config) {
  std::set<uint16_t> seen;
  for (const ZoneManifest& z : manifests) {
    if (z.zone_id == 0 || !seen.insert(z.zone_id).second) {
      throw SimError(ErrorCode::DuplicateZoneId,
                     "duplicate or zero zone id " + std::to_string(z.zone_id));
    }
  }
  // Zone ids must be dense 1..n.
  std::vector<ZoneManifest> ordered(manifests);
  std::sort(ordered.begin(), ordered.end(),
            [](const ZoneManifest& a, const ZoneManifest& b) { return a.zone_id < b.zone_id; });
  for (size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].zone_id != i + 1) {
      throw SimError(ErrorCode::DuplicateZoneId,
                     "zone ids must be dense 1..n, missing id " + std::to_string(i + 1));
    }
  }

  MemoryLayout layout;
  layout.address_space = config.address_space;
  layout.zone_count = static_cast<uint16_t>(ordered.size());
  layout.peripheral_count = config.peripheral_count;

  PhysAddr cursor = 0;
  auto place = [&](uint64_t length, RegionKind kind) {
    layout.regions.push_back({cursor, length, kind});
    cursor += length;
  };
  place(config.ree_size, RegionKind::ree());
  place(config.shared_size, RegionKind::shared());
  place(config.trampoline_size, RegionKind::trampoline());
  place(config.monitor_size, RegionKind::monitor());
  place(config.gatekeeper_size, RegionKind::gatekeeper());
  for (const ZoneManifest& z : ordered) {
    place(z.mem_size, RegionKind::zone(z.zone_id));
  }
  place(config.ppc_mmio_size, RegionKind::ppc_mmio());
  for (uint16_t p = 1; p <= config.peripheral_count; ++p) {
    place(config.peripheral_size, RegionKind::peripheral(p));
  }

  if (cursor > config.address_space) {
    throw SimError(ErrorCode::Overlap, "regions exceed the address space: need " +
                                           std::to_string(cursor) + " of " +
                                           std::to_string(config.address_space));
  }
  return layout;
}

std::optional<RegionKind> region_of(const MemoryLayout& layout, PhysAddr addr) {
  // Regions are sorted by start; binary search on start.
  const auto& rs = layout.regions;
  size_t lo = 0, hi = rs.size();
  while (lo < hi) {
    size_t mid = (lo + hi) / 2;
    if (rs[mid].start <= addr) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == 0) return std::nullopt;
  const Region& r = rs[lo - 1];
  if (r.contains(addr)) return r.kind;
  return std::nullopt;
}

Permission reference_permission(const AccessContext& ctx, RegionKind kind,
                                const std::set<uint16_t>& peripheral_whitelist) {
  if (ctx.world == World::Normal) {
    if (kind.tag == RegionTag::Ree || kind.tag == RegionTag::Shared) return Permission::RW;
    return Permission::NA;
  }
  if (ctx.active_zone.has_value()) {
    uint16_t z = *ctx.active_zone;
    switch (kind.tag) {
      case RegionTag::Zone:
        return kind.id == z ? Permission::RW : Permission::NA;
      case RegionTag::Shared:
        return Permission::RW;
      case RegionTag::Trampoline:
        return Permission::RO;
      case RegionTag::Peripheral:
        return peripheral_whitelist.count(kind.id) ? Permission::RW : Permission::NA;
      default:
        return Permission::NA;
    }
  }
  // MONITOR row.
  if (kind.tag == RegionTag::Gatekeeper) return Permission::NA;
  if (kind.tag == RegionTag::PpcMmio) {
    return ctx.ppc_unlocked_window ? Permission::RW : Permission::NA;
  }
  return Permission::RW;
}

}  // namespace rezone
