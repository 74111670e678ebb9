#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rezone/sim.hpp"
#include "rezone/trace.hpp"

namespace rezone {

/// Per-event unit costs. Relative weights only; the defaults set every weight
/// to 1 except the MQ round trip, which carries the ACU clock-ratio factor.
struct CostWeights {
  double cache_line_flush = 1.0;
  double tlb_invalidate = 1.0;
  double mq_roundtrip = 5.6;
  double uncached_fetch = 1.0;
  double ppc_config_write = 1.0;
  double context_save_restore = 1.0;

  static CostWeights all_unit() { return {1, 1, 1, 1, 1, 1}; }
};

/// In-zone work units carry a fixed unit cost; they model the workload's
/// intrinsic time, not a tunable overhead weight.
inline constexpr double kWorkUnitCost = 1.0;

struct CostBreakdown {
  std::map<Phase, double> by_phase;
  double total = 0.0;

  double phase(Phase p) const {
    auto it = by_phase.find(p);
    return it == by_phase.end() ? 0.0 : it->second;
  }
};

/// Weighted cost of one event (0 for unweighted kinds).
double event_cost(const TraceEvent& ev, const CostWeights& w);

/// Sums weights over the trace; total equals the sum of the phase breakdown
/// exactly.
CostBreakdown account(const TraceLog& trace, const CostWeights& w);

/// Per-occurrence switch costs, sliced from the trace: an entry spans
/// SYNC_HALT..MMU_OFF, an exit EXIT_INVALIDATE..RESUME.
struct SwitchCosts {
  std::vector<double> entries;
  std::vector<double> exits;
};

SwitchCosts switch_costs(const TraceLog& trace, const CostWeights& w);

struct Workload {
  struct Call {
    uint16_t zone = 1;
    uint64_t units = 1;
  };
  std::vector<Call> calls;
  uint64_t irqs_during_zone = 0;  // cost-model-only preemption count
};

struct ComparisonTable {
  struct Row {
    std::string config;
    double total = 0.0;
    double overhead_ratio = 0.0;  // vs the NoRZ row
  };
  std::vector<Row> rows;

  double total(const std::string& config) const;
  std::string to_text() const;
};

/// Runs the workload under NoRZ and RZ, prices the traces (boot excluded),
/// and derives RZ-no-IRQ from the RZ run: each declared IRQ adds one average
/// exit+entry round trip to RZ and nothing to RZ-no-IRQ.
ComparisonTable compare(const Workload& workload, const CostWeights& w,
                        const SimConfig& base_config);

}  // namespace rezone
