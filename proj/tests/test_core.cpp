#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <vector>

#include "aitf/core.hpp"

using namespace aitf;

namespace {

// Independent matcher used as the oracle: spells the definition out
// directly instead of going through the production code paths.
bool brute_force_matches(const FlowLabel& label, const Packet& p) {
  if (p.kind == PacketKind::Control) return false;
  bool dst_ok = false;
  if (const NodeId* host = std::get_if<NodeId>(&label.dst)) {
    dst_ok = *host == p.dst;
  } else {
    for (NodeId m : std::get<Prefix>(label.dst).members)
      if (m == p.dst) dst_ok = true;
  }
  if (!dst_ok) return false;
  if (label.src_kind == SourceKind::Host) return p.src == label.src;
  return p.stamp.first_gateway && *p.stamp.first_gateway == label.src;
}

Packet make_packet(NodeId src, NodeId dst, NodeId first_gw = kNoNode,
                   PacketKind kind = PacketKind::Attack) {
  Packet p;
  p.src = src;
  p.dst = dst;
  p.kind = kind;
  if (first_gw != kNoNode) p.stamp.first_gateway = first_gw;
  return p;
}

}  // namespace

TEST_CASE("flow label matching basics") {
  const NodeId V = 1, A = 2, B = 3, R1 = 10;

  CHECK(flow_label_matches(host_label(V, A), make_packet(A, V)));
  CHECK_FALSE(flow_label_matches(host_label(V, A), make_packet(B, V)));
  CHECK(flow_label_matches(gateway_label(V, R1), make_packet(A, V, R1)));
  CHECK_FALSE(flow_label_matches(gateway_label(V, R1), make_packet(A, V)));
  // Control traffic never matches a data-flow label.
  CHECK_FALSE(flow_label_matches(host_label(V, A),
                                 make_packet(A, V, R1, PacketKind::Control)));
}

TEST_CASE("flow label matching agrees with the brute-force oracle over a toy "
          "topology") {
  // 3 hosts, 2 gateways; enumerate every label shape against every packet.
  const std::vector<NodeId> hosts = {1, 2, 3};
  const std::vector<NodeId> gws = {10, 11};
  Prefix net12{{1, 2}, 8};

  std::vector<FlowLabel> labels;
  for (NodeId d : hosts) {
    for (NodeId s : hosts) labels.push_back(host_label(d, s));
    for (NodeId g : gws) labels.push_back(gateway_label(d, g));
  }
  for (NodeId s : hosts)
    labels.push_back(FlowLabel{Destination{net12}, SourceKind::Host, s});
  for (NodeId g : gws)
    labels.push_back(FlowLabel{Destination{net12}, SourceKind::Gateway, g});

  std::vector<Packet> packets;
  for (NodeId s : hosts)
    for (NodeId d : hosts) {
      packets.push_back(make_packet(s, d));
      for (NodeId g : gws) packets.push_back(make_packet(s, d, g));
    }

  for (const FlowLabel& l : labels)
    for (const Packet& p : packets)
      CHECK(flow_label_matches(l, p) == brute_force_matches(l, p));
}

TEST_CASE("aggregation is monotone: the stamped gateway label covers the "
          "host label") {
  Rng rng(7);
  const std::vector<NodeId> routers = {10, 11, 12};
  for (int i = 0; i < 2000; ++i) {
    const NodeId src = static_cast<NodeId>(rng.next_below(5));
    const NodeId dst = static_cast<NodeId>(5 + rng.next_below(5));
    const NodeId path0 = routers[rng.next_below(routers.size())];
    Packet p = make_packet(src, dst);
    const NodeId path[] = {path0};
    p = stamp_packet(p, path, AntiSpoofMode::Minimal, 0.0, routers, rng);
    if (flow_label_matches(host_label(dst, src), p)) {
      CHECK(flow_label_matches(gateway_label(dst, *p.stamp.first_gateway), p));
    }
  }
}

TEST_CASE("message flag combinations: exactly four are legal") {
  AitfMessage m;
  m.flow_labels = {host_label(1, 2)};
  m.origin = 5;
  m.target = 1;

  m.syn = false; m.ack = false; m.nonce = 0;
  CHECK(classify_message(m) == MessageKind::Request);
  m.syn = true; m.ack = false; m.nonce = 0;
  CHECK(classify_message(m) == MessageKind::Syn);
  m.syn = true; m.ack = true; m.nonce = 0xdead;
  CHECK(classify_message(m) == MessageKind::SynAck);
  m.syn = false; m.ack = true; m.nonce = 0xdead;
  CHECK(classify_message(m) == MessageKind::Ack);

  m.syn = true; m.ack = false; m.nonce = 1;  // SYN must carry nonce 0
  CHECK(classify_message(m) == MessageKind::Invalid);
  m.syn = true; m.ack = true; m.nonce = 0;  // SYN/ACK must carry a nonce
  CHECK(classify_message(m) == MessageKind::Invalid);

  m.syn = false; m.ack = false; m.nonce = 0;
  m.flow_labels.clear();  // empty label list is not a message
  CHECK(classify_message(m) == MessageKind::Invalid);
  m.flow_labels.assign(kMaxLabelsPerMessage + 1, host_label(1, 2));
  CHECK(classify_message(m) == MessageKind::Invalid);
}

TEST_CASE("nonces: deterministic, epoch-bound, victim-bound") {
  const NonceKey key{0x0123456789abcdefull, 0xfedcba9876543210ull};
  const std::vector<FlowLabel> labels = {host_label(1, 2), host_label(1, 3)};

  CHECK(make_nonce(key, 1, labels, 5) == make_nonce(key, 1, labels, 5));
  CHECK(make_nonce(key, 1, labels, 5) != 0);

  // Adjacent epochs must not collide (beyond a negligible hash accident).
  int epoch_collisions = 0;
  for (std::uint64_t e = 0; e < 10000; ++e)
    if (make_nonce(key, 1, labels, e) == make_nonce(key, 1, labels, e + 1))
      ++epoch_collisions;
  CHECK(epoch_collisions == 0);

  int victim_collisions = 0;
  for (NodeId v = 0; v < 10000; ++v)
    if (make_nonce(key, v, labels, 5) == make_nonce(key, v + 1, labels, 5))
      ++victim_collisions;
  CHECK(victim_collisions == 0);
}

TEST_CASE("nonce verification accepts the current and previous epoch only, "
          "and only with the issuing key") {
  const NonceKey key{1, 2};
  const std::vector<FlowLabel> labels = {host_label(1, 2)};
  const double issue_time = 25.0;  // epoch 3
  const std::uint64_t nonce =
      make_nonce(key, 1, labels, nonce_epoch(issue_time));

  CHECK(verify_nonce(key, 1, labels, nonce, issue_time));
  CHECK(verify_nonce(key, 1, labels, nonce, issue_time + 7.9));
  // One epoch later the nonce is still inside the acceptance window.
  CHECK(verify_nonce(key, 1, labels, nonce, 33.0));
  // Two epochs later it is stale.
  CHECK_FALSE(verify_nonce(key, 1, labels, nonce, 41.0));

  // Exhaustive small-key sweep: no other key verifies this nonce.
  for (std::uint64_t hi = 0; hi < 16; ++hi)
    for (std::uint64_t lo = 0; lo < 16; ++lo) {
      const NonceKey other{hi, lo};
      if (hi == key.hi && lo == key.lo) continue;
      CHECK_FALSE(verify_nonce(other, 1, labels, nonce, issue_time));
    }

  // Different victim or labels must not verify.
  CHECK_FALSE(verify_nonce(key, 2, labels, nonce, issue_time));
  const std::vector<FlowLabel> other_labels = {host_label(1, 3)};
  CHECK_FALSE(verify_nonce(key, 1, other_labels, nonce, issue_time));
}

TEST_CASE("stamping: exact in wide mode, probabilistic in minimal mode") {
  Rng rng(42);
  const std::vector<NodeId> universe = {10, 11, 12, 13};
  const NodeId path[] = {10, 13};
  Packet p = make_packet(1, 2);

  Packet minimal =
      stamp_packet(p, path, AntiSpoofMode::Minimal, 0.0, universe, rng);
  REQUIRE(minimal.stamp.first_gateway.has_value());
  CHECK(*minimal.stamp.first_gateway == 10);
  CHECK_FALSE(minimal.stamp.full_path.has_value());

  Packet wide = stamp_packet(p, path, AntiSpoofMode::Wide, 0.0, universe, rng);
  REQUIRE(wide.stamp.full_path.has_value());
  CHECK(*wide.stamp.full_path == std::vector<NodeId>{10, 13});
  CHECK(*wide.stamp.first_gateway == 10);

  Packet legacy = stamp_packet(p, {}, AntiSpoofMode::Minimal, 0.0, universe,
                               rng);
  CHECK_FALSE(legacy.stamp.first_gateway.has_value());

  // Monte-Carlo misattribution fraction at false_id_prob = 0.1.
  int wrong = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Packet s =
        stamp_packet(p, path, AntiSpoofMode::Minimal, 0.1, universe, rng);
    if (*s.stamp.first_gateway != 10) ++wrong;
    else CHECK(*s.stamp.first_gateway == 10);
  }
  const double fraction = static_cast<double>(wrong) / n;
  CHECK(fraction == doctest::Approx(0.1).epsilon(0.1));  // 0.1 +- 0.01
}

TEST_CASE("destination helpers") {
  CHECK(label_dst_host(host_label(7, 1)) == 7);
  Prefix pre{{1, 2, 3}, 8};
  CHECK(label_dst_host(FlowLabel{Destination{pre}, SourceKind::Host, 1}) ==
        kNoNode);
  CHECK(pre.contains(2));
  CHECK_FALSE(pre.contains(9));

  std::vector<FlowLabel> same = {host_label(7, 1), host_label(7, 2)};
  CHECK(common_dst_host(same) == 7);
  std::vector<FlowLabel> mixed = {host_label(7, 1), host_label(8, 2)};
  CHECK(common_dst_host(mixed) == kNoNode);
}
