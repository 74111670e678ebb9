#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>

namespace rezone {

/// Static description of one zone: its private memory size, the SMC id range
/// routed to it, and the peripherals its trusted OS may keep using.
struct ZoneManifest {
  uint16_t zone_id = 0;           // >= 1
  uint64_t mem_size = 64 * 1024;
  uint64_t smc_first = 0;         // half-open [smc_first, smc_last)
  uint64_t smc_last = 0;
  std::set<uint16_t> peripheral_whitelist;
};

/// SMC ids below this are monitor services, never routed to zones.
inline constexpr uint64_t kMonitorServiceIdLimit = 64;

struct RouteResult {
  enum class Kind { Zone, MonitorService, Unknown } kind = Kind::Unknown;
  uint16_t zone_id = 0;
};

/// Zone registry. Frozen once the first untrusted step runs.
struct ZoneRegistry {
  std::map<uint16_t, ZoneManifest> zones;
  std::optional<uint16_t> last_zone;  // most recent completed entry
  bool frozen = false;

  const ZoneManifest& manifest(uint16_t zone_id) const;
};

/// Adds a manifest. Throws SimError{DuplicateZoneId | SmcRangeOverlap |
/// LateRegistration}. Ranges must be nonempty, ids >= 1, and must not reach
/// into the reserved monitor-service range.
void register_zone(ZoneRegistry& reg, const ZoneManifest& manifest);

/// Pure routing lookup over the configured id space.
RouteResult route_smc(const ZoneRegistry& reg, uint64_t smc_id);

}  // namespace rezone
