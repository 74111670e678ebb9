#include "rezone/cpu_cluster.hpp"

#include <algorithm>
#include <cassert>

#include "rezone/errors.hpp"

namespace rezone {

/// EL3 page tables live at this offset of the MONITOR region; a TLB walk is a
/// bus read of that word.
inline constexpr uint64_t kEl3PageTableOffset = 0x200;

CacheLine* Cache::find(uint64_t pa_line, bool ns) {
  for (CacheLine& l : lines) {
    if (l.pa_line == pa_line && l.ns == ns) return &l;
  }
  return nullptr;
}

const CacheLine* Cache::find(uint64_t pa_line, bool ns) const {
  return const_cast<Cache*>(this)->find(pa_line, ns);
}

Machine make_machine(const MemoryLayout& layout, const ClusterConfig& config) {
  Machine m;
  m.layout = layout;
  m.line_bytes = config.line_bytes;
  m.cluster.cores.resize(config.cores);
  for (int i = 0; i < config.cores; ++i) {
    CoreState& c = m.cluster.cores[i];
    c.id = i;
    c.l1.capacity = config.l1_lines;
  }
  m.cluster.l2.capacity = config.l2_lines;
  m.cluster.tlb_capacity = config.tlb_entries;
  return m;
}

namespace {

struct BusCheck {
  bool ok = false;
  MemVerdict fault = MemVerdict::FaultUnmapped;
  RegionKind region;
  bool has_region = false;
};

/// TZASC then PPC, at bus level. The PPC sees one master for the whole
/// cluster and nothing that is served from a cache.
BusCheck bus_check(Machine& m, int actor, PhysAddr pa, bool ns, World world,
                   bool is_write, Phase phase) {
  BusCheck out;
  auto region = region_of(m.layout, pa);
  if (!region) {
    out.fault = MemVerdict::FaultUnmapped;
    return out;
  }
  out.region = *region;
  out.has_region = true;
  if ((ns && region_is_secure(*region)) || (!ns && world == World::Normal)) {
    out.fault = MemVerdict::FaultTzasc;
    return out;
  }
  bool allow = ppc_check_traced(m.ppc, m.layout, kClusterMaster, *region,
                                is_write ? Access::Write : Access::Read, m.trace,
                                actor, phase);
  if (!allow) {
    out.fault = MemVerdict::FaultPpc;
    return out;
  }
  out.ok = true;
  return out;
}

/// Dirty-line write-back. Checked like any other bus write; a denial drops
/// the data (bus abort), it does not fault the running core.
void write_back_line(Machine& m, int actor, const CacheLine& line, Phase phase) {
  BusCheck chk = bus_check(m, actor, line.pa_line, line.ns, World::Secure, true, phase);
  if (!chk.ok) return;
  for (size_t i = 0; i < line.words.size(); ++i) {
    m.memory.store(line.pa_line + i * kWordBytes, line.words[i]);
  }
}

void insert_l2(Machine& m, int actor, CacheLine line, Phase phase) {
  Cache& l2 = m.cluster.l2;
  if (CacheLine* existing = l2.find(line.pa_line, line.ns)) {
    *existing = std::move(line);
    return;
  }
  if (static_cast<int>(l2.lines.size()) >= l2.capacity) {
    CacheLine victim = std::move(l2.lines.front());
    l2.lines.erase(l2.lines.begin());
    if (victim.dirty) write_back_line(m, actor, victim, phase);
  }
  l2.lines.push_back(std::move(line));
}

void insert_l1(Machine& m, int core_id, CacheLine line, Phase phase) {
  Cache& l1 = m.cluster.cores[core_id].l1;
  if (static_cast<int>(l1.lines.size()) >= l1.capacity) {
    CacheLine victim = std::move(l1.lines.front());
    l1.lines.erase(l1.lines.begin());
    insert_l2(m, core_id, std::move(victim), phase);
  }
  l1.lines.push_back(std::move(line));
}

/// Lookup order: own L1, shared L2, then (with SMP coherency) other L1s.
CacheLine* cache_lookup(Machine& m, int core_id, uint64_t pa_line, bool ns) {
  if (CacheLine* l = m.cluster.cores[core_id].l1.find(pa_line, ns)) return l;
  if (CacheLine* l = m.cluster.l2.find(pa_line, ns)) return l;
  if (m.cluster.coherency_on) {
    for (CoreState& other : m.cluster.cores) {
      if (other.id == core_id) continue;
      if (CacheLine* l = other.l1.find(pa_line, ns)) return l;
    }
  }
  return nullptr;
}

TlbEntry* tlb_find(ClusterState& cl, uint64_t va_page, bool el3) {
  for (TlbEntry& e : cl.s1_tlb) {
    if (e.va_page == va_page && e.el3 == el3) return &e;
  }
  return nullptr;
}

void tlb_insert(ClusterState& cl, TlbEntry entry) {
  if (static_cast<int>(cl.s1_tlb.size()) >= cl.tlb_capacity) {
    cl.s1_tlb.erase(cl.s1_tlb.begin());
  }
  cl.s1_tlb.push_back(entry);
}

bool is_device(const Machine& m, PhysAddr pa, RegionKind region) {
  if (region.tag == RegionTag::PpcMmio || region.tag == RegionTag::Peripheral) return true;
  return m.in_mu_a(pa) || m.in_mu_b(pa);
}

TraceEvent mem_event(int actor, Phase phase, PhysAddr pa, bool ns, El el, World world,
                     const AccessRequest& req, MemVerdict verdict,
                     const std::optional<RegionKind>& region) {
  TraceEvent ev;
  ev.actor = actor;
  ev.phase = phase;
  ev.kind = EventKind::Mem;
  ev.pa = pa;
  ev.ns = ns;
  ev.el = el;
  ev.world = world;
  ev.is_write = req.is_write;
  ev.is_fetch = req.is_fetch;
  ev.verdict = verdict;
  if (region) {
    ev.region = *region;
    ev.has_region = true;
  }
  return ev;
}

}  // namespace

AccessResult mem_access(Machine& m, const AccessRequest& req, Phase phase) {
  CoreState& core = m.cluster.cores[req.core];
  assert(core.run != RunState::Halted && "halted cores issue no accesses");

  PhysAddr pa = req.addr;
  bool ns = false;

  // Translation.
  if (core.world == World::Normal) {
    ns = true;  // the NS bit is forced high outside the secure world
  } else if (core.el == El::EL3) {
    ns = false;
    if (req.via_mmu && !core.el3_mmu_on) {
      // MMU (and thus EL3 caching) off: straight to the bus.
      BusCheck chk = bus_check(m, req.core, pa, ns, core.world, req.is_write, phase);
      if (!chk.ok) {
        m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                               chk.fault, chk.has_region ? std::optional<RegionKind>(chk.region) : std::nullopt));
        return AccessResult::make_fault(
            chk.fault == MemVerdict::FaultTzasc   ? FaultKind::Tzasc
            : chk.fault == MemVerdict::FaultPpc   ? FaultKind::Ppc
                                                  : FaultKind::Unmapped);
      }
      uint64_t value = 0;
      if (m.in_mu_a(pa) && req.is_write && req.mq_payload) {
        m.mu.request = req.mq_payload;
      } else if (req.is_write) {
        m.memory.store(pa, req.wval);
      } else {
        value = m.memory.load(pa);
      }
      m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                             MemVerdict::Bypass, chk.region));
      return AccessResult::make_value(value);
    }
    if (req.via_mmu) {
      // Identity translation, cached in the shared TLB. A miss walks the EL3
      // page tables in MONITOR memory; if the walk read is denied the
      // exception path cannot even be loaded.
      uint64_t page = page_of(pa);
      if (!tlb_find(m.cluster, page, /*el3=*/true)) {
        BusCheck walk = bus_check(m, req.core, m.layout.base_of(RegionKind::monitor()) +
                                                   kEl3PageTableOffset,
                                  false, World::Secure, false, phase);
        if (!walk.ok) {
          m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                                 MemVerdict::FaultTlbWalkBlocked, std::nullopt));
          return AccessResult::make_fault(FaultKind::TlbWalkBlocked);
        }
        tlb_insert(m.cluster, {page, page, false, true, true});
      }
    }
  } else {
    // S.EL1 / S.EL0: attacker-controlled stage-1 mappings via the shared TLB.
    uint64_t va_page = page_of(req.addr);
    TlbEntry* entry = tlb_find(m.cluster, va_page, /*el3=*/false);
    if (!entry) {
      const MappingEntry* map = nullptr;
      for (const MappingEntry& e : core.s1_mappings) {
        if (e.va_page == va_page) {
          map = &e;
          break;
        }
      }
      if (!map) {
        m.trace.emit(mem_event(req.core, phase, req.addr, false, core.el, core.world,
                               req, MemVerdict::FaultUnmapped, std::nullopt));
        return AccessResult::make_fault(FaultKind::Unmapped);
      }
      tlb_insert(m.cluster, {va_page, map->pa_page, map->ns, map->writable, false});
      entry = &m.cluster.s1_tlb.back();
    }
    if (req.is_write && !entry->writable) {
      m.trace.emit(mem_event(req.core, phase, req.addr, entry->ns, core.el, core.world,
                             req, MemVerdict::FaultUnmapped, std::nullopt));
      return AccessResult::make_fault(FaultKind::Unmapped);
    }
    pa = entry->pa_page | (req.addr & (kPageBytes - 1));
    ns = entry->ns;
  }

  auto region = region_of(m.layout, pa);
  bool device = region && is_device(m, pa, *region);

  // Cache lookup, keyed (line, NS). Hits bypass the TZASC and the PPC.
  if (!device) {
    uint64_t line_pa = m.line_of(pa);
    if (CacheLine* line = cache_lookup(m, req.core, line_pa, ns)) {
      size_t word = (pa - line_pa) / kWordBytes;
      if (req.is_write) {
        line->words[word] = req.wval;
        line->dirty = true;
        m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                               MemVerdict::HitSilentWrite, region));
        return AccessResult::silent_write();
      }
      m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                             MemVerdict::HitValue, region));
      return AccessResult::make_value(line->words[word]);
    }
  }

  // Bus transaction.
  BusCheck chk = bus_check(m, req.core, pa, ns, core.world, req.is_write, phase);
  if (!chk.ok) {
    m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                           chk.fault, chk.has_region ? std::optional<RegionKind>(chk.region) : std::nullopt));
    return AccessResult::make_fault(chk.fault == MemVerdict::FaultTzasc ? FaultKind::Tzasc
                                    : chk.fault == MemVerdict::FaultPpc ? FaultKind::Ppc
                                                                        : FaultKind::Unmapped);
  }

  if (device) {
    uint64_t value = 0;
    if (m.in_mu_a(pa)) {
      if (req.is_write) {
        if (req.mq_payload) m.mu.request = req.mq_payload;
      } else {
        value = m.mu.reply ? (m.mu.reply->kind == MqKind::Ack ? 1 : 2) : 0;
      }
    } else if (req.is_write) {
      m.memory.store(pa, req.wval);
    } else {
      value = m.memory.load(pa);
    }
    m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                           MemVerdict::Bypass, chk.region));
    return AccessResult::make_value(value);
  }

  // Miss: fill (write-allocate), then serve from the new line.
  uint64_t line_pa = m.line_of(pa);
  CacheLine line;
  line.pa_line = line_pa;
  line.ns = ns;
  line.words.resize(m.line_bytes / kWordBytes);
  for (size_t i = 0; i < line.words.size(); ++i) {
    line.words[i] = m.memory.load(line_pa + i * kWordBytes);
  }
  size_t word = (pa - line_pa) / kWordBytes;
  uint64_t value;
  if (req.is_write) {
    line.words[word] = req.wval;
    line.dirty = true;
    value = req.wval;
  } else {
    value = line.words[word];
  }
  insert_l1(m, req.core, std::move(line), phase);
  m.trace.emit(mem_event(req.core, phase, pa, ns, core.el, core.world, req,
                         MemVerdict::MissFilled, chk.region));
  return AccessResult::make_value(value);
}

uint32_t flush_caches(Machine& m, int core_id, Phase phase) {
  uint32_t count = 0;
  Cache& l1 = m.cluster.cores[core_id].l1;
  for (CacheLine& line : l1.lines) {
    if (line.dirty) write_back_line(m, core_id, line, phase);
    ++count;
  }
  l1.lines.clear();
  for (CacheLine& line : m.cluster.l2.lines) {
    if (line.dirty) write_back_line(m, core_id, line, phase);
    ++count;
  }
  m.cluster.l2.lines.clear();

  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Flush;
  ev.count = count;
  m.trace.emit(ev);
  return count;
}

void tlb_invalidate(Machine& m, int core_id, Phase phase) {
  m.cluster.s1_tlb.clear();
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Tlbi;
  m.trace.emit(ev);
}

void set_coherency(Machine& m, int core_id, bool on, Phase phase) {
  m.cluster.coherency_on = on;
  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Coherency;
  ev.flag = on;
  m.trace.emit(ev);
}

uint32_t invalidate_trampoline_lines(Machine& m, int core_id, Phase phase) {
  const Region& tramp = m.layout.find(RegionKind::trampoline());
  uint32_t count = 0;
  auto drop = [&](Cache& cache) {
    auto it = cache.lines.begin();
    while (it != cache.lines.end()) {
      if (tramp.contains(it->pa_line)) {
        it = cache.lines.erase(it);  // discarded, never written back
        ++count;
      } else {
        ++it;
      }
    }
  };
  drop(m.cluster.cores[core_id].l1);
  drop(m.cluster.l2);

  TraceEvent ev;
  ev.actor = core_id;
  ev.phase = phase;
  ev.kind = EventKind::Flush;
  ev.count = count;
  m.trace.emit(ev);
  return count;
}

}  // namespace rezone
