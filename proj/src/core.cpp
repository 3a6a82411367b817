#include "aitf/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace aitf {

bool Prefix::contains(NodeId n) const {
  return std::binary_search(members.begin(), members.end(), n);
}

bool flow_label_matches(const FlowLabel& label, const Packet& packet) {
  if (packet.kind == PacketKind::Control) return false;

  const bool dst_ok = std::visit(
      [&](const auto& d) -> bool {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, NodeId>) return packet.dst == d;
        else return d.contains(packet.dst);
      },
      label.dst);
  if (!dst_ok) return false;

  switch (label.src_kind) {
    case SourceKind::Host:
      return packet.src == label.src;
    case SourceKind::Gateway:
      return packet.stamp.first_gateway.has_value() &&
             *packet.stamp.first_gateway == label.src;
  }
  return false;
}

MessageKind classify_message(const AitfMessage& msg) {
  if (msg.flow_labels.empty() || msg.flow_labels.size() > kMaxLabelsPerMessage)
    return MessageKind::Invalid;
  if (!msg.syn && !msg.ack) return MessageKind::Request;
  if (msg.syn && !msg.ack)
    return msg.nonce == 0 ? MessageKind::Syn : MessageKind::Invalid;
  if (msg.syn && msg.ack)
    return msg.nonce != 0 ? MessageKind::SynAck : MessageKind::Invalid;
  return MessageKind::Ack;  // syn=0, ack=1; nonce echoes the SYN/ACK
}

// ---------------------------------------------------------------------------
// SipHash-2-4: the standard short-input keyed PRF (128-bit key, 64-bit tag).

namespace {

inline std::uint64_t rotl64(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

struct SipState {
  std::uint64_t v0, v1, v2, v3;

  explicit SipState(const NonceKey& key)
      : v0(key.lo ^ 0x736f6d6570736575ull),
        v1(key.hi ^ 0x646f72616e646f6dull),
        v2(key.lo ^ 0x6c7967656e657261ull),
        v3(key.hi ^ 0x7465646279746573ull) {}

  void round() {
    v0 += v1; v1 = rotl64(v1, 13); v1 ^= v0; v0 = rotl64(v0, 32);
    v2 += v3; v3 = rotl64(v3, 16); v3 ^= v2;
    v0 += v3; v3 = rotl64(v3, 21); v3 ^= v0;
    v2 += v1; v1 = rotl64(v1, 17); v1 ^= v2; v2 = rotl64(v2, 32);
  }
};

std::uint64_t siphash24(const NonceKey& key, const std::uint8_t* data,
                        std::size_t len) {
  SipState s(key);
  const std::size_t blocks = len / 8;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::uint64_t m;
    std::memcpy(&m, data + 8 * i, 8);
    s.v3 ^= m;
    s.round();
    s.round();
    s.v0 ^= m;
  }
  std::uint64_t last = static_cast<std::uint64_t>(len & 0xff) << 56;
  const std::size_t tail = len & 7;
  for (std::size_t i = 0; i < tail; ++i)
    last |= static_cast<std::uint64_t>(data[blocks * 8 + i]) << (8 * i);
  s.v3 ^= last;
  s.round();
  s.round();
  s.v0 ^= last;
  s.v2 ^= 0xff;
  s.round();
  s.round();
  s.round();
  s.round();
  return s.v0 ^ s.v1 ^ s.v2 ^ s.v3;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

// Canonical byte encoding of a label list for hashing. Order-sensitive.
void encode_labels(std::vector<std::uint8_t>& buf,
                   std::span<const FlowLabel> labels) {
  put_u32(buf, static_cast<std::uint32_t>(labels.size()));
  for (const FlowLabel& l : labels) {
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, NodeId>) {
            buf.push_back(0);
            put_u32(buf, d);
          } else {
            buf.push_back(1);
            put_u32(buf, d.agg_bits);
            put_u32(buf, static_cast<std::uint32_t>(d.members.size()));
            for (NodeId m : d.members) put_u32(buf, m);
          }
        },
        l.dst);
    buf.push_back(static_cast<std::uint8_t>(l.src_kind));
    put_u32(buf, l.src);
  }
}

}  // namespace

std::size_t FlowLabelHash::operator()(const FlowLabel& l) const {
  // Unkeyed structural hash for container use.
  static const NonceKey table_key{0x9ae16a3b2f90404full,
                                  0xc3a5c85c97cb3127ull};
  std::vector<std::uint8_t> buf;
  encode_labels(buf, std::span<const FlowLabel>(&l, 1));
  return static_cast<std::size_t>(siphash24(table_key, buf.data(), buf.size()));
}

std::uint64_t nonce_epoch(double now) {
  if (now < 0) return 0;
  return static_cast<std::uint64_t>(now / kNonceEpochSeconds);
}

std::uint64_t make_nonce(const NonceKey& key, NodeId victim,
                         std::span<const FlowLabel> labels,
                         std::uint64_t epoch) {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + labels.size() * 12);
  put_u32(buf, victim);
  put_u64(buf, epoch);
  encode_labels(buf, labels);
  const std::uint64_t h = siphash24(key, buf.data(), buf.size());
  return h != 0 ? h : 0x9e3779b97f4a7c15ull;  // keep SYN/ACK nonce nonzero
}

bool verify_nonce(const NonceKey& key, NodeId victim,
                  std::span<const FlowLabel> labels, std::uint64_t nonce,
                  double now) {
  const std::uint64_t epoch = nonce_epoch(now);
  if (nonce == make_nonce(key, victim, labels, epoch)) return true;
  return epoch > 0 && nonce == make_nonce(key, victim, labels, epoch - 1);
}

std::uint64_t label_digest(NodeId peer, NodeId victim,
                           std::span<const FlowLabel> labels) {
  static const NonceKey digest_key{0x2545f4914f6cdd1dull,
                                   0x9e6c63d0873084a3ull};
  std::vector<std::uint8_t> buf;
  put_u32(buf, peer);
  put_u32(buf, victim);
  encode_labels(buf, labels);
  return siphash24(digest_key, buf.data(), buf.size());
}

NodeId label_dst_host(const FlowLabel& label) {
  if (const NodeId* host = std::get_if<NodeId>(&label.dst)) return *host;
  return kNoNode;
}

NodeId common_dst_host(std::span<const FlowLabel> labels) {
  if (labels.empty()) return kNoNode;
  const NodeId host = label_dst_host(labels.front());
  if (host == kNoNode) return kNoNode;
  for (const FlowLabel& l : labels.subspan(1))
    if (label_dst_host(l) != host) return kNoNode;
  return host;
}

Packet stamp_packet(Packet packet, std::span<const NodeId> border_path,
                    AntiSpoofMode mode, double false_id_prob,
                    std::span<const NodeId> universe, Rng& rng) {
  packet.stamp = AntiSpoofStamp{};
  if (border_path.empty()) return packet;  // legacy traffic, no stamp

  if (mode == AntiSpoofMode::Wide) {
    packet.stamp.full_path.emplace(border_path.begin(), border_path.end());
    packet.stamp.first_gateway = border_path.front();
    return packet;
  }

  NodeId stamped = border_path.front();
  if (false_id_prob > 0 && rng.next_unit() < false_id_prob) {
    // Misattribution: any other border router, uniformly.
    std::vector<NodeId> others;
    others.reserve(universe.size());
    for (NodeId r : universe)
      if (r != border_path.front()) others.push_back(r);
    if (!others.empty()) stamped = others[rng.next_below(others.size())];
  }
  packet.stamp.first_gateway = stamped;
  return packet;
}

}  // namespace aitf
