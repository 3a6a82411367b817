#ifndef AITF_CORE_HPP
#define AITF_CORE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "aitf/rng.hpp"

namespace aitf {

// Identifies one host or router in a simulated topology. Unique within a
// topology and stable across a run.
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

// One edge-network: the set of hosts it contains plus an aggregation-depth
// analogue of a prefix length. Self-contained so that label matching never
// needs topology state.
struct Prefix {
  std::vector<NodeId> members;  // sorted, unique
  unsigned agg_bits = 0;

  bool contains(NodeId n) const;
  bool operator==(const Prefix&) const = default;
};

// Victim side of a flow label: a single host or a whole edge prefix.
using Destination = std::variant<NodeId, Prefix>;

// Source side of a flow label. Gateway denotes the escalated aggregate:
// all traffic forwarded by that border router toward the destination.
enum class SourceKind : std::uint8_t { Host, Gateway };

struct FlowLabel {
  Destination dst;
  SourceKind src_kind = SourceKind::Host;
  NodeId src = kNoNode;

  bool operator==(const FlowLabel&) const = default;
};

struct FlowLabelHash {
  std::size_t operator()(const FlowLabel& l) const;
};

// Host label helper (the common case throughout the protocol).
inline FlowLabel host_label(NodeId dst, NodeId src_host) {
  return FlowLabel{Destination{dst}, SourceKind::Host, src_host};
}
inline FlowLabel gateway_label(NodeId dst, NodeId src_gateway) {
  return FlowLabel{Destination{dst}, SourceKind::Gateway, src_gateway};
}

enum class PacketKind : std::uint8_t { Good, Attack, Control };

// What the anti-spoofing oracle attaches to a packet. In minimal mode only
// the border router nearest the source is identified (with a configurable
// error rate); in wide mode the whole border-router sequence is carried.
struct AntiSpoofStamp {
  std::optional<NodeId> first_gateway;
  std::optional<std::vector<NodeId>> full_path;

  bool operator==(const AntiSpoofStamp&) const = default;
};

struct Packet {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  std::uint64_t size_bits = 1;
  PacketKind kind = PacketKind::Good;
  AntiSpoofStamp stamp;
};

// True iff the packet's destination falls under label.dst and its source
// side matches (by source host, or by stamped first gateway). Pure function
// of (label, packet); Control packets never match.
bool flow_label_matches(const FlowLabel& label, const Packet& packet);

// ---------------------------------------------------------------------------
// AITF messages

inline constexpr std::size_t kMaxLabelsPerMessage = 64;

struct AitfMessage {
  std::vector<FlowLabel> flow_labels;  // non-empty, <= kMaxLabelsPerMessage
  bool syn = false;
  bool ack = false;
  std::uint64_t nonce = 0;
  NodeId origin = kNoNode;  // sender
  NodeId target = kNoNode;  // the party the message concerns (see kinds)
};

// The four legal flag combinations. Anything else is rejected at decode.
enum class MessageKind : std::uint8_t { Request, Syn, SynAck, Ack, Invalid };

MessageKind classify_message(const AitfMessage& msg);

// ---------------------------------------------------------------------------
// Stateless handshake nonces (SYN-cookie style)

struct NonceKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
};

// Epoch bucketing: a gateway accepts nonces from the current and previous
// epoch, which covers any handshake round trip within the grace period.
inline constexpr double kNonceEpochSeconds = 8.0;

std::uint64_t nonce_epoch(double now);

// Keyed 64-bit digest of (victim, labels, epoch). Deterministic for equal
// inputs, infeasible to predict without the key, and never zero so that a
// SYN/ACK is distinguishable from a SYN by its nonce field alone.
std::uint64_t make_nonce(const NonceKey& key, NodeId victim,
                         std::span<const FlowLabel> labels,
                         std::uint64_t epoch);

// Stateless verification against the current and previous epoch.
bool verify_nonce(const NonceKey& key, NodeId victim,
                  std::span<const FlowLabel> labels, std::uint64_t nonce,
                  double now);

// Order-sensitive digest of a label list; used to key pending handshakes.
std::uint64_t label_digest(NodeId peer, NodeId victim,
                           std::span<const FlowLabel> labels);

// Host destination of a label, or kNoNode for prefix destinations.
NodeId label_dst_host(const FlowLabel& label);

// The single host destination shared by every label, or kNoNode if the
// labels name a prefix or disagree. Protocol messages group labels per
// victim, so this is the victim a message concerns.
NodeId common_dst_host(std::span<const FlowLabel> labels);

// ---------------------------------------------------------------------------
// Anti-spoofing stamp oracle

enum class AntiSpoofMode : std::uint8_t { Minimal, Wide };

// Stamps a packet that traverses `border_path` (source side first).
// Minimal: first_gateway = border_path[0] with probability 1 - false_id_prob,
// otherwise a uniformly random *other* router from `universe`. Wide: the
// exact path is attached. An empty path leaves the packet unstamped
// (legacy traffic).
Packet stamp_packet(Packet packet, std::span<const NodeId> border_path,
                    AntiSpoofMode mode, double false_id_prob,
                    std::span<const NodeId> universe, Rng& rng);

}  // namespace aitf

#endif  // AITF_CORE_HPP
