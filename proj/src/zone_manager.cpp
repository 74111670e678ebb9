#include "rezone/zone_manager.hpp"

#include "rezone/errors.hpp"

namespace rezone {

const ZoneManifest& ZoneRegistry::manifest(uint16_t zone_id) const {
  auto it = zones.find(zone_id);
  if (it == zones.end()) {
    throw SimError(ErrorCode::DuplicateZoneId, "unknown zone " + std::to_string(zone_id));
  }
  return it->second;
}

void register_zone(ZoneRegistry& reg, const ZoneManifest& manifest) {
  if (reg.frozen) {
    throw SimError(ErrorCode::LateRegistration,
                   "zone registration after the normal world started");
  }
  if (manifest.zone_id == 0) {
    throw SimError(ErrorCode::DuplicateZoneId, "zone ids start at 1");
  }
  if (manifest.smc_first >= manifest.smc_last) {
    throw SimError(ErrorCode::SmcRangeOverlap, "empty smc range for zone " +
                                                   std::to_string(manifest.zone_id));
  }
  if (manifest.smc_first < kMonitorServiceIdLimit) {
    throw SimError(ErrorCode::SmcRangeOverlap,
                   "smc range collides with reserved monitor-service ids");
  }
  if (reg.zones.count(manifest.zone_id)) {
    throw SimError(ErrorCode::DuplicateZoneId,
                   "duplicate zone id " + std::to_string(manifest.zone_id));
  }
  for (const auto& [id, z] : reg.zones) {
    bool disjoint = manifest.smc_last <= z.smc_first || z.smc_last <= manifest.smc_first;
    if (!disjoint) {
      throw SimError(ErrorCode::SmcRangeOverlap,
                     "smc ranges of zones " + std::to_string(id) + " and " +
                         std::to_string(manifest.zone_id) + " overlap");
    }
  }
  reg.zones[manifest.zone_id] = manifest;
}

RouteResult route_smc(const ZoneRegistry& reg, uint64_t smc_id) {
  if (smc_id < kMonitorServiceIdLimit) {
    return {RouteResult::Kind::MonitorService, 0};
  }
  for (const auto& [id, z] : reg.zones) {
    if (smc_id >= z.smc_first && smc_id < z.smc_last) {
      return {RouteResult::Kind::Zone, id};
    }
  }
  return {RouteResult::Kind::Unknown, 0};
}

}  // namespace rezone
