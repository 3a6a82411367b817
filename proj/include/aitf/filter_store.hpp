#ifndef AITF_FILTER_STORE_HPP
#define AITF_FILTER_STORE_HPP

#include <cstdint>
#include <limits>
#include <queue>
#include <unordered_map>
#include <vector>

#include "aitf/core.hpp"

namespace aitf {

// Sentinel TTL for filters kept until further notice (escalated local
// blocks, by default).
inline constexpr double kTtlForever = std::numeric_limits<double>::infinity();

// One wire-speed filter. Live during [installed_at, installed_at + ttl);
// a matching packet at exactly the expiry instant passes.
struct WireFilter {
  FlowLabel label;
  double installed_at = 0;
  double ttl = 0;
  std::uint64_t hit_bits = 0;

  double expires_at() const { return installed_at + ttl; }
  bool live(double now) const { return now < expires_at(); }
};

// Capacity-bounded wire-speed filter table (TCAM model). Exact-host labels
// are hash-indexed; prefix-destination labels fall back to a scan list.
// |entries| <= capacity always; installs beyond capacity are rejected and
// counted, never evicted.
class WireFilterTable {
 public:
  enum class InstallResult : std::uint8_t { Installed, Refreshed, TableFull };

  explicit WireFilterTable(std::size_t capacity) : capacity_(capacity) {}

  InstallResult install(const FlowLabel& label, double now, double ttl);

  // Removes every entry with expiry <= now and returns them (labels plus
  // their final hit counters, which the protocol layer inspects).
  std::vector<WireFilter> expire(double now);

  struct Verdict {
    bool dropped = false;
    FlowLabel matched;  // valid when dropped
  };

  // Single-packet path: drops iff a live entry matches, charging the
  // packet's bits to that entry. Most-specific match wins (host label
  // before gateway aggregate before prefix).
  Verdict filter_packet(const Packet& packet, double now);

  // Fluid-model path: the matching live entry, or nullptr. Charge the
  // dropped volume through add_hit_bits on the returned entry's label.
  const WireFilter* find_match(const Packet& packet, double now) const;
  void add_hit_bits(const FlowLabel& label, double bits);

  const WireFilter* find(const FlowLabel& label) const;
  bool contains_live(const FlowLabel& label, double now) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool has_spare_capacity() const { return entries_.size() < capacity_; }
  std::size_t peak_size() const { return peak_size_; }
  std::uint64_t rejected() const { return rejected_; }
  std::uint64_t total_hit_bits() const;

  // Earliest pending expiry, +inf when empty. Drives timer scheduling.
  double next_expiry() const;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [label, entry] : entries_) fn(entry);
  }

 private:
  WireFilter* match_mut(const Packet& packet, double now);

  std::size_t capacity_;
  std::unordered_map<FlowLabel, WireFilter, FlowLabelHash> entries_;
  std::vector<FlowLabel> prefix_labels_;  // entries whose dst is a Prefix
  // Lazy min-heap of (expiry, seq, label); stale items are skipped on pop.
  // The seq tie-break gives equal-expiry entries a total order.
  struct HeapItem {
    double at;
    std::uint64_t seq;
    FlowLabel label;
  };
  struct HeapCmp {
    bool operator()(const HeapItem& a, const HeapItem& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<HeapItem, std::vector<HeapItem>, HeapCmp> expiry_heap_;
  std::uint64_t heap_seq_ = 0;
  std::size_t peak_size_ = 0;
  std::uint64_t rejected_ = 0;
};

// ---------------------------------------------------------------------------

// DRAM record of a past filtering agreement. strikes counts how many times
// the flow re-triggered while shadowed (capped at 1: two chances total).
struct ShadowEntry {
  double recorded_at = 0;
  double ttl = 0;
  int strikes = 0;

  double expires_at() const { return recorded_at + ttl; }
  bool live(double now) const { return now < expires_at(); }
};

enum class ShadowResult : std::uint8_t { NotShadowed, FirstStrike, SecondStrike };

// Unbounded-by-capacity shadow table. entry_budget is informational
// (R_max * T); exceeding it is logged, not fatal.
class ShadowTable {
 public:
  ShadowTable() = default;
  explicit ShadowTable(double entry_budget) : entry_budget_(entry_budget) {}

  // NotShadowed: no live record existed; a fresh one is created.
  // FirstStrike: a live record existed with strikes=0; it moves to 1.
  // SecondStrike: a live record already at strikes=1 (caller escalates).
  ShadowResult check(const FlowLabel& label, double now, double ttl);

  const ShadowEntry* find(const FlowLabel& label, double now) const;

  void sweep(double now);
  std::size_t size() const { return entries_.size(); }
  std::size_t peak_size() const { return peak_size_; }
  double entry_budget() const { return entry_budget_; }
  std::uint64_t over_budget_events() const { return over_budget_events_; }

 private:
  std::unordered_map<FlowLabel, ShadowEntry, FlowLabelHash> entries_;
  struct HeapItem {
    double at;
    std::uint64_t seq;
    FlowLabel label;
  };
  struct HeapCmp {
    bool operator()(const HeapItem& a, const HeapItem& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<HeapItem, std::vector<HeapItem>, HeapCmp> expiry_heap_;
  std::uint64_t heap_seq_ = 0;
  double entry_budget_ = std::numeric_limits<double>::infinity();
  std::size_t peak_size_ = 0;
  std::uint64_t over_budget_events_ = 0;
};

}  // namespace aitf

#endif  // AITF_FILTER_STORE_HPP
