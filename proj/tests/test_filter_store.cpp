#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include "aitf/filter_store.hpp"
#include "aitf/rng.hpp"

using namespace aitf;

namespace {

// Naive list-scan reference with identical semantics; the production table
// must replay any op sequence to the same observable state.
class RefTable {
 public:
  explicit RefTable(std::size_t cap) : cap_(cap) {}

  WireFilterTable::InstallResult install(const FlowLabel& l, double now,
                                         double ttl) {
    for (auto& e : entries_)
      if (e.label == l) {
        e.installed_at = now;
        e.ttl = ttl;
        return WireFilterTable::InstallResult::Refreshed;
      }
    if (entries_.size() >= cap_) return WireFilterTable::InstallResult::TableFull;
    entries_.push_back(WireFilter{l, now, ttl, 0});
    return WireFilterTable::InstallResult::Installed;
  }

  std::vector<FlowLabel> expire(double now) {
    std::vector<FlowLabel> out;
    std::vector<WireFilter> keep;
    for (auto& e : entries_) {
      if (e.installed_at + e.ttl <= now) out.push_back(e.label);
      else keep.push_back(e);
    }
    entries_ = std::move(keep);
    return out;
  }

  bool drops(const Packet& p, double now, FlowLabel* matched) const {
    // Same precedence as the production table: host label, then gateway,
    // then prefix destinations in insertion order.
    const WireFilter* host = nullptr;
    const WireFilter* gw = nullptr;
    const WireFilter* prefix = nullptr;
    for (const auto& e : entries_) {
      if (!(e.installed_at <= now && now < e.installed_at + e.ttl)) continue;
      if (!flow_label_matches(e.label, p)) continue;
      const bool is_prefix = std::holds_alternative<Prefix>(e.label.dst);
      if (is_prefix) {
        if (prefix == nullptr) prefix = &e;
      } else if (e.label.src_kind == SourceKind::Host) {
        if (host == nullptr) host = &e;
      } else if (gw == nullptr) {
        gw = &e;
      }
    }
    const WireFilter* hit = host ? host : (gw ? gw : prefix);
    if (hit == nullptr) return false;
    if (matched != nullptr) *matched = hit->label;
    return true;
  }

  std::size_t size() const { return entries_.size(); }

  std::vector<std::tuple<NodeId, int, NodeId>> state_key() const {
    std::vector<std::tuple<NodeId, int, NodeId>> v;
    for (const auto& e : entries_)
      v.emplace_back(label_dst_host(e.label),
                     static_cast<int>(e.label.src_kind), e.label.src);
    std::sort(v.begin(), v.end());
    return v;
  }

 private:
  std::size_t cap_;
  std::vector<WireFilter> entries_;
};

std::vector<std::tuple<NodeId, int, NodeId>> table_state_key(
    const WireFilterTable& t) {
  std::vector<std::tuple<NodeId, int, NodeId>> v;
  t.for_each([&](const WireFilter& e) {
    v.emplace_back(label_dst_host(e.label), static_cast<int>(e.label.src_kind),
                   e.label.src);
  });
  std::sort(v.begin(), v.end());
  return v;
}

Packet attack_packet(NodeId src, NodeId dst, NodeId gw = kNoNode) {
  Packet p;
  p.src = src;
  p.dst = dst;
  p.kind = PacketKind::Attack;
  p.size_bits = 1000;
  if (gw != kNoNode) p.stamp.first_gateway = gw;
  return p;
}

}  // namespace

TEST_CASE("install, refresh, capacity") {
  WireFilterTable t(2);
  const FlowLabel f1 = host_label(1, 2);
  const FlowLabel f2 = host_label(1, 3);
  const FlowLabel f3 = host_label(1, 4);

  CHECK(t.install(f1, 0.0, 1.0) == WireFilterTable::InstallResult::Installed);
  CHECK(t.size() == 1);
  CHECK(t.install(f1, 0.5, 1.0) == WireFilterTable::InstallResult::Refreshed);
  CHECK(t.size() == 1);
  // The refresh moved the expiry out to 1.5.
  CHECK(t.expire(1.0).empty());
  CHECK(t.expire(1.5).size() == 1);

  WireFilterTable small(1);
  CHECK(small.install(f2, 0.0, 1.0) ==
        WireFilterTable::InstallResult::Installed);
  CHECK(small.install(f3, 0.0, 1.0) ==
        WireFilterTable::InstallResult::TableFull);
  CHECK(small.size() == 1);
  CHECK(small.rejected() == 1);
}

TEST_CASE("expiry boundary is half-open: live during [t, t+ttl)") {
  WireFilterTable t(10);
  const FlowLabel f = host_label(1, 2);
  t.install(f, 0.0, 1.0);

  CHECK(t.expire(0.999).empty());
  CHECK(t.filter_packet(attack_packet(2, 1), 0.999).dropped);
  // At exactly the timeout the filter no longer drops and expires.
  CHECK_FALSE(t.filter_packet(attack_packet(2, 1), 1.0).dropped);
  const auto gone = t.expire(1.0);
  REQUIRE(gone.size() == 1);
  CHECK(gone[0].label == f);
  CHECK(gone[0].hit_bits == 1000);
  CHECK(t.size() == 0);
}

TEST_CASE("filter verdicts match the list-scan oracle on mixed tables") {
  Rng rng(11);
  WireFilterTable t(100);
  RefTable ref(100);

  // 50 host labels and 5 gateway labels, varying ttls.
  for (int i = 0; i < 50; ++i) {
    const FlowLabel l =
        host_label(static_cast<NodeId>(rng.next_below(4)),
                   static_cast<NodeId>(10 + rng.next_below(30)));
    const double ttl = 0.5 + rng.next_unit() * 2.0;
    t.install(l, 0.0, ttl);
    ref.install(l, 0.0, ttl);
  }
  for (int i = 0; i < 5; ++i) {
    const FlowLabel l =
        gateway_label(static_cast<NodeId>(rng.next_below(4)),
                      static_cast<NodeId>(100 + rng.next_below(5)));
    t.install(l, 0.0, 3.0);
    ref.install(l, 0.0, 3.0);
  }

  for (int i = 0; i < 10000; ++i) {
    const Packet p = attack_packet(
        static_cast<NodeId>(10 + rng.next_below(32)),
        static_cast<NodeId>(rng.next_below(5)),
        static_cast<NodeId>(100 + rng.next_below(6)));
    const double now = rng.next_unit() * 3.5;
    FlowLabel expect_label;
    const bool expect = ref.drops(p, now, &expect_label);
    const WireFilter* got = t.find_match(p, now);
    CHECK((got != nullptr) == expect);
    if (expect && got != nullptr) CHECK(got->label == expect_label);
  }
}

TEST_CASE("random op sequences replay identically against the oracle") {
  Rng rng(99);
  for (int round = 0; round < 30; ++round) {
    const std::size_t cap = 1 + rng.next_below(12);
    WireFilterTable t(cap);
    RefTable ref(cap);
    double now = 0;
    for (int op = 0; op < 400; ++op) {
      now += rng.next_unit() * 0.3;
      const auto choice = rng.next_below(10);
      if (choice < 5) {
        const FlowLabel l =
            host_label(static_cast<NodeId>(rng.next_below(3)),
                       static_cast<NodeId>(10 + rng.next_below(8)));
        const double ttl = 0.1 + rng.next_unit();
        CHECK(t.install(l, now, ttl) == ref.install(l, now, ttl));
      } else if (choice < 8) {
        auto got = t.expire(now);
        auto want = ref.expire(now);
        std::vector<std::tuple<NodeId, int, NodeId>> a, b;
        for (const auto& e : got)
          a.emplace_back(label_dst_host(e.label),
                         static_cast<int>(e.label.src_kind), e.label.src);
        for (const auto& l : want)
          b.emplace_back(label_dst_host(l), static_cast<int>(l.src_kind),
                         l.src);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
      } else {
        const Packet p = attack_packet(
            static_cast<NodeId>(10 + rng.next_below(9)),
            static_cast<NodeId>(rng.next_below(4)));
        const bool got = t.find_match(p, now) != nullptr;
        const bool want = ref.drops(p, now, nullptr);
        CHECK(got == want);
      }
      CHECK(t.size() <= cap);
      CHECK(table_state_key(t) == ref.state_key());
    }
  }
}

TEST_CASE("hit accounting is per filter and monotone") {
  WireFilterTable t(4);
  t.install(host_label(1, 2), 0.0, 10.0);
  t.install(gateway_label(1, 50), 0.0, 10.0);

  // The host label is more specific and takes the hit.
  Packet both = attack_packet(2, 1, 50);
  t.filter_packet(both, 1.0);
  CHECK(t.find(host_label(1, 2))->hit_bits == 1000);
  CHECK(t.find(gateway_label(1, 50))->hit_bits == 0);

  // Only the aggregate matches a different source from the same gateway.
  Packet other = attack_packet(3, 1, 50);
  t.filter_packet(other, 1.0);
  CHECK(t.find(gateway_label(1, 50))->hit_bits == 1000);
  CHECK(t.total_hit_bits() == 2000);
}

TEST_CASE("shadow table: two chances inside the window, reset after") {
  ShadowTable s(100.0);
  const FlowLabel f = host_label(1, 2);
  const double T = 10.0;

  CHECK(s.check(f, 0.0, T) == ShadowResult::NotShadowed);
  CHECK(s.check(f, 3.0, T) == ShadowResult::FirstStrike);
  CHECK(s.check(f, 6.0, T) == ShadowResult::SecondStrike);
  CHECK(s.check(f, 9.0, T) == ShadowResult::SecondStrike);
  // Past the recorded window the slate is clean.
  CHECK(s.check(f, 10.0, T) == ShadowResult::NotShadowed);
  CHECK(s.size() == 1);
}

TEST_CASE("shadow table grows past the informational budget without failing") {
  ShadowTable s(4.0);
  for (NodeId i = 0; i < 10; ++i)
    CHECK(s.check(host_label(1, 100 + i), 0.0, 5.0) ==
          ShadowResult::NotShadowed);
  CHECK(s.size() == 10);
  CHECK(s.peak_size() == 10);
  CHECK(s.over_budget_events() > 0);
  s.sweep(5.0);
  CHECK(s.size() == 0);
}
