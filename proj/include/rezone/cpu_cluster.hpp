#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "rezone/mem_topology.hpp"
#include "rezone/mq.hpp"
#include "rezone/ppc.hpp"
#include "rezone/trace.hpp"
#include "rezone/zone_manager.hpp"

namespace rezone {

inline constexpr uint64_t kPageBytes = 4096;
inline constexpr uint64_t kWordBytes = 8;

inline uint64_t page_of(uint64_t addr) { return addr & ~(kPageBytes - 1); }

/// An S.EL1 page-table entry as the attacker may write it: any VA to any
/// (PA, NS) pair. Page granularity.
struct MappingEntry {
  uint64_t va_page = 0;
  uint64_t pa_page = 0;
  bool ns = false;
  bool writable = true;
};

/// Shared-TLB entry. Entries carry no zone id; EL3 identity translations are
/// distinguished only by the el3 flag (separate address space).
struct TlbEntry {
  uint64_t va_page = 0;
  uint64_t pa_page = 0;
  bool ns = false;
  bool writable = true;
  bool el3 = false;
};

struct CacheLine {
  uint64_t pa_line = 0;  // line-aligned
  bool ns = false;
  bool dirty = false;
  std::vector<uint64_t> words;
};

/// FIFO cache; at most one line per (pa_line, ns).
struct Cache {
  int capacity = 4;
  std::vector<CacheLine> lines;

  CacheLine* find(uint64_t pa_line, bool ns);
  const CacheLine* find(uint64_t pa_line, bool ns) const;
};

enum class RunState : uint8_t {
  Ready,
  Sleeping,    // wfi
  Halted,      // parked by entry IPI
  ParkedLock,  // spinning on rz_lock in trampoline code
  BlockedMq,   // awaiting gatekeeper reply
  Hung,        // unrecoverable fault (EL3 vector fetch blocked)
  Done,
};

struct CoreState {
  int id = 0;
  El el = El::EL1;
  World world = World::Normal;
  bool el3_mmu_on = true;
  uint64_t token_reg = 0;  // TPIDR_EL3 analogue; readable/writable at EL3 only
  std::vector<MappingEntry> s1_mappings;
  Cache l1;
  RunState run = RunState::Ready;
  bool halt_pending = false;
};

struct ClusterState {
  std::vector<CoreState> cores;
  Cache l2;
  std::vector<TlbEntry> s1_tlb;  // shared across the cluster, FIFO
  int tlb_capacity = 4;
  bool coherency_on = true;
};

struct ClusterConfig {
  int cores = 4;
  int l1_lines = 4;
  int l2_lines = 16;
  int tlb_entries = 4;
  uint64_t line_bytes = 16;
};

/// Word-addressed sparse backing store over a deterministic background
/// pattern: unwritten words read as a pseudo-random function of their
/// address, standing in for the installed firmware/OS images. Only written
/// words occupy space, which keeps state snapshots small.
struct MainMemory {
  std::map<uint64_t, uint64_t> words;  // key = byte address / 8

  static uint64_t background(PhysAddr addr) {
    uint64_t z = (addr / kWordBytes) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t load(PhysAddr addr) const {
    auto it = words.find(addr / kWordBytes);
    return it == words.end() ? background(addr) : it->second;
  }
  void store(PhysAddr addr, uint64_t value) { words[addr / kWordBytes] = value; }
};

enum class FaultKind : uint8_t { Tzasc, Ppc, Unmapped, TlbWalkBlocked };

struct AccessResult {
  enum class Status : uint8_t { Value, SilentCacheWrite, Fault } status = Status::Value;
  uint64_t value = 0;
  FaultKind fault = FaultKind::Unmapped;

  bool ok() const { return status != Status::Fault; }
  static AccessResult make_value(uint64_t v) { return {Status::Value, v, FaultKind::Unmapped}; }
  static AccessResult silent_write() { return {Status::SilentCacheWrite, 0, FaultKind::Unmapped}; }
  static AccessResult make_fault(FaultKind f) { return {Status::Fault, 0, f}; }
};

/// The hardware aggregate every bus transaction flows through.
struct Machine {
  MemoryLayout layout;
  PpcState ppc;
  ClusterState cluster;
  MainMemory memory;
  MuDevice mu;
  TraceLog trace;
  uint64_t line_bytes = 16;

  uint64_t line_of(PhysAddr a) const { return a & ~(line_bytes - 1); }
  PhysAddr mu_a_window() const {
    const Region& r = layout.find(RegionKind::shared());
    return r.end() - kMuWindowBytes;
  }
  PhysAddr mu_b_window() const {
    const Region& r = layout.find(RegionKind::gatekeeper());
    return r.end() - kMuWindowBytes;
  }
  bool in_mu_a(PhysAddr a) const { return a >= mu_a_window() && a < mu_a_window() + kMuWindowBytes; }
  bool in_mu_b(PhysAddr a) const { return a >= mu_b_window() && a < mu_b_window() + kMuWindowBytes; }
};

Machine make_machine(const MemoryLayout& layout, const ClusterConfig& config);

struct AccessRequest {
  int core = 0;
  uint64_t addr = 0;       // VA when translated, PA otherwise
  bool is_write = false;
  uint64_t wval = 0;
  bool via_mmu = true;
  bool is_fetch = false;
  // Payload delivered if the write lands on the MU_A doorbell.
  std::optional<MqMessage> mq_payload;
};

/// The memory access path:
///   1. EL3 with MMU off: identity, bypass TLB and caches, straight to bus.
///   2. Translation: identity at EL3 (TLB-cached; a miss walks page tables in
///      MONITOR memory and faults TlbWalkBlocked if that bus read is denied);
///      s1_mappings + shared TLB at S.EL1/EL0; identity NS=1 in normal world.
///   3. Cache lookup keyed (line, NS): hits are served with no TZASC/PPC
///      check; writes to cached lines succeed silently. Cross-core L1 hits
///      require SMP coherency.
///   4. Bus: TZASC (NS=1 to secure region, or NS=0 from normal world, is
///      denied), then PPC. MMIO regions and the MU windows never allocate.
AccessResult mem_access(Machine& m, const AccessRequest& req, Phase phase);

/// Empties the core's L1 and the shared L2; dirty lines are written back
/// through checked bus writes. Returns the number of lines removed.
uint32_t flush_caches(Machine& m, int core_id, Phase phase);

/// Drops every shared-TLB entry.
void tlb_invalidate(Machine& m, int core_id, Phase phase);

void set_coherency(Machine& m, int core_id, bool on, Phase phase);

/// Drops trampoline-region lines from the core's L1 and the L2 without
/// write-back (step F: poisoned content is discarded, never flushed).
uint32_t invalidate_trampoline_lines(Machine& m, int core_id, Phase phase);

}  // namespace rezone
