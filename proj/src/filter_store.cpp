#include "aitf/filter_store.hpp"

#include <algorithm>
#include <cmath>

#include "aitf/log.hpp"

namespace aitf {

namespace {
bool is_prefix_dst(const FlowLabel& label) {
  return std::holds_alternative<Prefix>(label.dst);
}
}  // namespace

WireFilterTable::InstallResult WireFilterTable::install(const FlowLabel& label,
                                                        double now,
                                                        double ttl) {
  auto it = entries_.find(label);
  if (it != entries_.end()) {
    it->second.installed_at = now;
    it->second.ttl = ttl;
    if (std::isfinite(ttl)) expiry_heap_.push({now + ttl, heap_seq_++, label});
    return InstallResult::Refreshed;
  }
  if (entries_.size() >= capacity_) {
    ++rejected_;
    return InstallResult::TableFull;
  }
  entries_.emplace(label, WireFilter{label, now, ttl, 0});
  if (is_prefix_dst(label)) prefix_labels_.push_back(label);
  if (std::isfinite(ttl)) expiry_heap_.push({now + ttl, heap_seq_++, label});
  peak_size_ = std::max(peak_size_, entries_.size());
  return InstallResult::Installed;
}

std::vector<WireFilter> WireFilterTable::expire(double now) {
  std::vector<WireFilter> expired;
  while (!expiry_heap_.empty() && expiry_heap_.top().at <= now) {
    const FlowLabel label = expiry_heap_.top().label;
    expiry_heap_.pop();
    auto it = entries_.find(label);
    if (it == entries_.end()) continue;           // already removed
    if (it->second.expires_at() > now) continue;  // refreshed since queued
    expired.push_back(it->second);
    if (is_prefix_dst(label))
      std::erase(prefix_labels_, label);
    entries_.erase(it);
  }
  return expired;
}

WireFilter* WireFilterTable::match_mut(const Packet& packet, double now) {
  // Host label first, then gateway aggregate, then prefix destinations.
  {
    auto it = entries_.find(host_label(packet.dst, packet.src));
    if (it != entries_.end() && it->second.live(now) &&
        now >= it->second.installed_at)
      return &it->second;
  }
  if (packet.stamp.first_gateway) {
    auto it =
        entries_.find(gateway_label(packet.dst, *packet.stamp.first_gateway));
    if (it != entries_.end() && it->second.live(now) &&
        now >= it->second.installed_at)
      return &it->second;
  }
  for (const FlowLabel& label : prefix_labels_) {
    auto it = entries_.find(label);
    if (it == entries_.end()) continue;
    if (it->second.live(now) && now >= it->second.installed_at &&
        flow_label_matches(label, packet))
      return &it->second;
  }
  return nullptr;
}

WireFilterTable::Verdict WireFilterTable::filter_packet(const Packet& packet,
                                                        double now) {
  WireFilter* hit = match_mut(packet, now);
  if (hit == nullptr) return Verdict{};
  hit->hit_bits += packet.size_bits;
  return Verdict{true, hit->label};
}

const WireFilter* WireFilterTable::find_match(const Packet& packet,
                                              double now) const {
  return const_cast<WireFilterTable*>(this)->match_mut(packet, now);
}

void WireFilterTable::add_hit_bits(const FlowLabel& label, double bits) {
  auto it = entries_.find(label);
  if (it != entries_.end())
    it->second.hit_bits += static_cast<std::uint64_t>(std::llround(bits));
}

const WireFilter* WireFilterTable::find(const FlowLabel& label) const {
  auto it = entries_.find(label);
  return it == entries_.end() ? nullptr : &it->second;
}

bool WireFilterTable::contains_live(const FlowLabel& label, double now) const {
  const WireFilter* f = find(label);
  return f != nullptr && f->live(now);
}

std::uint64_t WireFilterTable::total_hit_bits() const {
  std::uint64_t total = 0;
  for (const auto& [label, entry] : entries_) total += entry.hit_bits;
  return total;
}

double WireFilterTable::next_expiry() const {
  // The heap may hold stale items; the earliest valid one is still a lower
  // bound no earlier than the true next expiry of some past entry, so a
  // timer fired from it is at worst a no-op wakeup.
  if (expiry_heap_.empty()) return kTtlForever;
  return expiry_heap_.top().at;
}

// ---------------------------------------------------------------------------

ShadowResult ShadowTable::check(const FlowLabel& label, double now,
                                double ttl) {
  sweep(now);
  auto it = entries_.find(label);
  if (it != entries_.end() && it->second.live(now)) {
    if (it->second.strikes == 0) {
      it->second.strikes = 1;
      return ShadowResult::FirstStrike;
    }
    return ShadowResult::SecondStrike;
  }
  if (it != entries_.end()) entries_.erase(it);  // expired, window reset
  entries_.emplace(label, ShadowEntry{now, ttl, 0});
  expiry_heap_.push({now + ttl, heap_seq_++, label});
  peak_size_ = std::max(peak_size_, entries_.size());
  if (static_cast<double>(entries_.size()) > entry_budget_) {
    ++over_budget_events_;
    log_debug("shadow table above entry budget: ", entries_.size(), " > ",
              entry_budget_);
  }
  return ShadowResult::NotShadowed;
}

const ShadowEntry* ShadowTable::find(const FlowLabel& label,
                                     double now) const {
  auto it = entries_.find(label);
  if (it == entries_.end() || !it->second.live(now)) return nullptr;
  return &it->second;
}

void ShadowTable::sweep(double now) {
  while (!expiry_heap_.empty() && expiry_heap_.top().at <= now) {
    const FlowLabel label = expiry_heap_.top().label;
    expiry_heap_.pop();
    auto it = entries_.find(label);
    if (it != entries_.end() && it->second.expires_at() <= now)
      entries_.erase(it);
  }
}

}  // namespace aitf
