#ifndef AITF_PROTOCOL_HPP
#define AITF_PROTOCOL_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "aitf/core.hpp"
#include "aitf/filter_store.hpp"

namespace aitf {

enum class SanctionPolicy : std::uint8_t { Disconnect, PersistentFilter };
enum class GatewayPolicy : std::uint8_t {
  Cooperative,
  CompromisedOnOff,  // completes handshakes, then forwards again as soon as
                     // the requester's temporary filter lapses
  Unresponsive,      // ignores all AITF messages (legacy or hostile)
};
enum class AttackerPolicy : std::uint8_t {
  Compliant,  // pauses the flow for the full filtering window
  OnOff,      // pauses only until the gateway's temporary filter lapses
  Deaf,       // ignores filtering requests entirely
};

struct ProtocolConfig {
  double filtering_window = 120.0;     // T
  double temp_filter_timeout = 1.0;    // T_tmp
  double grace_period = 0.5;
  double escalated_filter_ttl = kTtlForever;
  SanctionPolicy sanction = SanctionPolicy::Disconnect;
  AntiSpoofMode antispoof = AntiSpoofMode::Minimal;
  std::size_t wire_capacity = 10000;
  double contract_rate = 1000.0;   // R: per-client filtering request rate
  double max_request_rate = 2000.0;  // R_max: shadow budget sizing
};

// ---------------------------------------------------------------------------
// Filtering contract: token-bucket enforcement of the agreed request rate.
// Burst equals one second's worth of tokens; a message is admitted or
// dropped wholesale.

class TokenBucket {
 public:
  TokenBucket(double rate, double burst)
      : rate_(rate), burst_(burst), tokens_(burst), last_(0) {}

  bool admit(double n, double now) {
    refill(now);
    if (tokens_ + 1e-9 < n) return false;
    tokens_ -= n;
    return true;
  }

  double available(double now) {
    refill(now);
    return tokens_;
  }

 private:
  void refill(double now) {
    if (now > last_) {
      tokens_ = std::min(burst_, tokens_ + (now - last_) * rate_);
      last_ = now;
    }
  }
  double rate_, burst_, tokens_, last_;
};

class FilteringContract {
 public:
  enum class Admit : std::uint8_t { Admitted, Dropped };

  FilteringContract(NodeId peer, double rate)
      : peer_(peer), bucket_(rate, rate) {}

  Admit admit(std::size_t n_labels, double now) {
    return bucket_.admit(static_cast<double>(n_labels), now)
               ? Admit::Admitted
               : Admit::Dropped;
  }

  NodeId peer() const { return peer_; }

 private:
  NodeId peer_;
  TokenBucket bucket_;
};

// ---------------------------------------------------------------------------

enum class HandshakePhase : std::uint8_t { SynSent, Established, Failed };

struct HandshakeState {
  std::uint64_t id = 0;
  NodeId peer_gateway = kNoNode;
  NodeId victim = kNoNode;
  std::vector<FlowLabel> labels;
  HandshakePhase phase = HandshakePhase::SynSent;
  double sent_at = 0;
  int retries_left = 1;  // 0 for the one re-run after an agreement violation
};

enum class EscalationResolution : std::uint8_t {
  Pending,
  RemoteBlocked,
  LocallyBlocked,
  Unresolvable,
};

struct EscalationRecord {
  FlowLabel label;
  int round = 1;  // 0 = per-source, 1 = gateway aggregate
  EscalationResolution resolution = EscalationResolution::Pending;
};

// ---------------------------------------------------------------------------
// Effects a state machine asks of the surrounding network.

enum class TimerKind : std::uint8_t { HandshakeGrace, FilterExpirySweep };

struct SendControl {
  NodeId dst;
  AitfMessage msg;
};
struct RelayRequest {  // gateway -> local client host
  NodeId host;
  AitfMessage msg;
};
struct SuppressFlows {  // compromised gateway pausing its forwarding
  std::vector<FlowLabel> labels;
  double until;
};
struct DisconnectHost {
  NodeId host;
};
struct StartTimer {
  double at;
  TimerKind kind;
  std::uint64_t key;
};
using ProtocolAction = std::variant<SendControl, RelayRequest, SuppressFlows,
                                    DisconnectHost, StartTimer>;

struct StepResult {
  std::vector<ProtocolAction> actions;
};

// How a gateway learns which border router forwarded the traffic a label
// describes. Backed by the flow registry in simulation, by fixtures in tests.
class StampEvidence {
 public:
  virtual ~StampEvidence() = default;
  virtual const AntiSpoofStamp* stamp_for(const FlowLabel& label) const = 0;
};

struct RouterMetrics {
  std::uint64_t invalid_messages = 0;
  std::uint64_t contract_drops = 0;
  std::uint64_t bad_nonce = 0;
  std::uint64_t table_full_events = 0;
  std::uint64_t handshakes_started = 0;
  std::uint64_t handshakes_established = 0;
  std::uint64_t handshakes_failed = 0;
  std::uint64_t escalations = 0;
  std::uint64_t unresolvable = 0;
  std::uint64_t local_only_labels = 0;
  std::uint64_t requests_relayed = 0;
  std::uint64_t ignored_syns = 0;
  std::uint64_t sanctions_disconnect = 0;
  std::uint64_t sanctions_filter = 0;
};

// ---------------------------------------------------------------------------
// One border router running both halves of the algorithm: the victim's
// gateway side (requests from clients, handshakes outward, escalation) and
// the attacker's gateway side (stateless SYN handling, nonce-checked
// installs, relaying to sources, sanctions).

class AitfRouter {
 public:
  AitfRouter(NodeId id, const ProtocolConfig& cfg, GatewayPolicy policy,
             NonceKey key);

  void add_client(NodeId host);
  bool is_client(NodeId host) const;
  void set_evidence(const StampEvidence* evidence) { evidence_ = evidence; }

  // --- victim's gateway algorithm ---
  StepResult on_victim_request(const AitfMessage& msg, double now);
  // SYN/ACKs addressed to local clients are intercepted and answered; any
  // other message passes through untouched (*intercepted = false).
  StepResult on_synack(const AitfMessage& msg, double now, bool* intercepted);
  StepResult escalate(const FlowLabel& label, NodeId attacker_gateway,
                      double now);

  // --- attacker's gateway algorithm ---
  StepResult on_syn(const AitfMessage& msg, double packet_sent_at, double now);
  StepResult on_ack(const AitfMessage& msg, double now);
  // A plain request naming this router as the traffic source (it is being
  // treated as an attacker after escalation).
  StepResult on_request_as_source(const AitfMessage& msg, double now);

  StepResult on_timer(TimerKind kind, std::uint64_t key, double now);

  NodeId id() const { return id_; }
  GatewayPolicy policy() const { return policy_; }
  WireFilterTable& wire() { return wire_; }
  const WireFilterTable& wire() const { return wire_; }
  ShadowTable& shadow() { return shadow_; }
  const ShadowTable& shadow() const { return shadow_; }
  const RouterMetrics& metrics() const { return metrics_; }
  const ProtocolConfig& config() const { return cfg_; }

  std::uint64_t escalations_for(NodeId victim) const;
  const EscalationRecord* escalation_record(const FlowLabel& label) const;

  // Per-handshake memory in use; constant under unanswered SYNs.
  std::size_t state_size() const;

 private:
  StepResult handle_as_own_gateway(const FlowLabel& label, ShadowResult strike,
                                   double now);
  void start_handshake(std::vector<FlowLabel> labels, NodeId peer,
                       NodeId victim, bool second_chance, double now,
                       StepResult& out);
  void install_temp(const FlowLabel& label, double now, StepResult& out);
  void schedule_sweep(StepResult& out);
  AitfMessage relay_message(const FlowLabel& label) const;

  NodeId id_;
  ProtocolConfig cfg_;
  GatewayPolicy policy_;
  NonceKey key_;
  const StampEvidence* evidence_ = nullptr;

  WireFilterTable wire_;
  ShadowTable shadow_;
  std::unordered_set<NodeId> clients_;
  std::unordered_map<NodeId, FilteringContract> contracts_;

  std::unordered_map<std::uint64_t, HandshakeState> handshakes_;  // SynSent
  std::unordered_map<std::uint64_t, std::uint64_t> by_digest_;
  std::uint64_t next_handshake_id_ = 1;

  std::unordered_map<FlowLabel, EscalationRecord, FlowLabelHash> escalations_;
  // Wide (gateway-aggregate) label of a remote escalation round -> the
  // per-source label whose record it settles.
  std::unordered_map<FlowLabel, FlowLabel, FlowLabelHash> wide_index_;
  std::map<NodeId, std::uint64_t> escalations_by_victim_;

  // A compromised gateway's private bookkeeping for timing its resumption
  // to the moment the requester's temporary filter lapses.
  std::unordered_map<std::uint64_t, double> cheat_syn_times_;

  RouterMetrics metrics_;
};

// ---------------------------------------------------------------------------
// Victim host: queues detected undesired flows (largest bandwidth first)
// and emits filtering requests within its contracted rate.

class VictimHost {
 public:
  VictimHost(NodeId id, NodeId gateway, double request_rate);

  // Detection layer reports an undesired flow; duplicates already queued
  // are ignored. Rate is used for largest-first ordering.
  void note_undesired_flow(const FlowLabel& label, double flow_rate_bps);

  struct DrainResult {
    std::vector<AitfMessage> messages;
    double retry_at = -1;  // wake-up time when backlog remains, else < 0
  };
  // Emit as many queued labels as the pacing budget allows.
  DrainResult drain(double now);

  bool already_requested(const FlowLabel& label) const;
  bool has_pending() const { return !queue_.empty(); }
  std::uint64_t labels_sent() const { return labels_sent_; }
  NodeId id() const { return id_; }
  NodeId gateway() const { return gateway_; }

 private:
  struct Queued {
    double rate;
    std::uint64_t seq;
    FlowLabel label;
  };
  struct QueueCmp {  // largest rate first, then arrival order
    bool operator()(const Queued& a, const Queued& b) const {
      return a.rate != b.rate ? a.rate < b.rate : a.seq > b.seq;
    }
  };

  NodeId id_;
  NodeId gateway_;
  double request_rate_;
  TokenBucket bucket_;
  std::priority_queue<Queued, std::vector<Queued>, QueueCmp> queue_;
  std::unordered_set<FlowLabel, FlowLabelHash> queued_;
  std::unordered_set<FlowLabel, FlowLabelHash> requested_;
  std::uint64_t seq_ = 0;
  std::uint64_t labels_sent_ = 0;
};

// ---------------------------------------------------------------------------
// Attack source: how a host reacts to a filtering request relayed by its
// gateway.

class AttackerHost {
 public:
  AttackerHost(NodeId id, AttackerPolicy policy)
      : id_(id), policy_(policy) {}

  struct PauseDecision {
    bool pause = false;
    double until = 0;
  };
  PauseDecision on_filter_request(double relay_sent_at, double now,
                                  double filtering_window,
                                  double temp_filter_timeout) const;

  NodeId id() const { return id_; }
  AttackerPolicy policy() const { return policy_; }

 private:
  NodeId id_;
  AttackerPolicy policy_;
};

}  // namespace aitf

#endif  // AITF_PROTOCOL_HPP
