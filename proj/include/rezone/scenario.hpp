#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rezone/adversary.hpp"
#include "rezone/cost_model.hpp"
#include "rezone/sim.hpp"

namespace rezone {

/// Parsed scenario description (see docs/spec-format.md). Everything a run
/// needs: platform geometry, zone manifests, programs or built-in scenarios,
/// scheduler mode, and the assertions that decide the exit status.
struct ScenarioSpec {
  SimConfig config;
  std::vector<ZoneManifest> zones;
  std::map<int, Program> core_programs;
  std::map<uint16_t, Program> zone_programs;
  std::map<uint16_t, AttackId> zone_attacks;
  std::optional<int> sync_scenario;  // 1..3; overrides programs
  std::optional<Workload> workload;
  CostWeights weights;

  uint64_t seed = 1;
  int depth = 30;
  bool explore_mode = false;

  bool assert_properties = false;
  bool assert_attacks_blocked = false;
  bool assert_cost_orderings = false;
};

/// Parses the scenario text. Throws SimError{SpecParse} with a message naming
/// the offending field.
ScenarioSpec parse_spec_text(const std::string& text);
ScenarioSpec parse_spec_file(const std::string& path);

struct RunOutcome {
  int exit_code = 0;           // 0 ok, 1 property violation, 2 spec error
  std::string report_text;
  std::string trace_text;
};

struct RunOverrides {
  std::optional<uint64_t> seed;
  std::optional<int> depth;
  std::optional<std::string> mode;  // norz | rz | rz-noirq
  std::optional<bool> explore_mode;
};

/// Boots, runs, checks, and renders both reports. Never throws for property
/// failures; those are the exit-code-1 path with the report still written.
RunOutcome run_scenario(const ScenarioSpec& spec, const RunOverrides& overrides = {});

}  // namespace rezone
