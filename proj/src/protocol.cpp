#include "aitf/protocol.hpp"

#include <algorithm>
#include <cmath>

#include "aitf/log.hpp"

namespace aitf {

namespace {

void append(StepResult& out, StepResult&& more) {
  for (auto& a : more.actions) out.actions.push_back(std::move(a));
}

}  // namespace

AitfRouter::AitfRouter(NodeId id, const ProtocolConfig& cfg,
                       GatewayPolicy policy, NonceKey key)
    : id_(id), cfg_(cfg), policy_(policy), key_(key),
      wire_(cfg.wire_capacity),
      shadow_(cfg.max_request_rate * cfg.filtering_window) {}

void AitfRouter::add_client(NodeId host) { clients_.insert(host); }

bool AitfRouter::is_client(NodeId host) const {
  return clients_.contains(host);
}

void AitfRouter::install_temp(const FlowLabel& label, double now,
                              StepResult& out) {
  if (wire_.install(label, now, cfg_.temp_filter_timeout) ==
      WireFilterTable::InstallResult::TableFull) {
    // Request stays counted; only the temporary protection is skipped.
    ++metrics_.table_full_events;
  }
  schedule_sweep(out);
}

void AitfRouter::schedule_sweep(StepResult& out) {
  const double next = wire_.next_expiry();
  if (std::isfinite(next))
    out.actions.push_back(StartTimer{next, TimerKind::FilterExpirySweep, 0});
}

AitfMessage AitfRouter::relay_message(const FlowLabel& label) const {
  AitfMessage msg;
  msg.flow_labels = {label};
  msg.origin = id_;
  msg.target = label.src;
  return msg;
}

void AitfRouter::start_handshake(std::vector<FlowLabel> labels, NodeId peer,
                                 NodeId victim, bool second_chance, double now,
                                 StepResult& out) {
  const std::uint64_t id = next_handshake_id_++;
  HandshakeState hs;
  hs.id = id;
  hs.peer_gateway = peer;
  hs.victim = victim;
  hs.labels = std::move(labels);
  hs.sent_at = now;
  hs.retries_left = second_chance ? 0 : 1;

  AitfMessage syn;
  syn.flow_labels = hs.labels;
  syn.syn = true;
  syn.origin = id_;
  syn.target = victim;

  // A re-run for the same labels supersedes any handshake still pending.
  const std::uint64_t digest = label_digest(peer, victim, hs.labels);
  if (auto old = by_digest_.find(digest); old != by_digest_.end())
    handshakes_.erase(old->second);
  by_digest_[digest] = id;
  handshakes_.emplace(id, std::move(hs));
  ++metrics_.handshakes_started;

  out.actions.push_back(SendControl{peer, std::move(syn)});
  out.actions.push_back(
      StartTimer{now + cfg_.grace_period, TimerKind::HandshakeGrace, id});
}

StepResult AitfRouter::handle_as_own_gateway(const FlowLabel& label,
                                             ShadowResult /*strike*/,
                                             double now) {
  // This router is both the victim's and the attacker's gateway: skip the
  // handshake and run the source side directly. The shadow entry recorded
  // by the caller arms the sanction check at filter expiry.
  StepResult out;
  install_temp(label, now, out);
  if (label.src_kind == SourceKind::Host && is_client(label.src)) {
    out.actions.push_back(RelayRequest{label.src, relay_message(label)});
    ++metrics_.requests_relayed;
  }
  return out;
}

StepResult AitfRouter::on_victim_request(const AitfMessage& msg, double now) {
  StepResult out;
  if (classify_message(msg) != MessageKind::Request || !is_client(msg.origin)) {
    ++metrics_.invalid_messages;
    return out;
  }
  auto [cit, inserted] =
      contracts_.try_emplace(msg.origin, msg.origin, cfg_.contract_rate);
  if (cit->second.admit(msg.flow_labels.size(), now) ==
      FilteringContract::Admit::Dropped) {
    ++metrics_.contract_drops;  // message discarded wholesale
    return out;
  }

  const NodeId victim = msg.origin;
  // (gateway, second-chance) -> labels; ordered so emission is deterministic.
  std::map<std::pair<NodeId, bool>, std::vector<FlowLabel>> batches;

  for (const FlowLabel& label : msg.flow_labels) {
    NodeId agw = kNoNode;
    if (label.src_kind == SourceKind::Gateway) {
      agw = label.src;
    } else if (evidence_ != nullptr) {
      if (const AntiSpoofStamp* stamp = evidence_->stamp_for(label);
          stamp != nullptr && stamp->first_gateway)
        agw = *stamp->first_gateway;
    }

    const ShadowResult strike =
        shadow_.check(label, now, cfg_.filtering_window);
    if (strike == ShadowResult::SecondStrike) {
      append(out, escalate(label, agw, now));
      continue;
    }

    if (agw == kNoNode) {
      // No stamp evidence (legacy path): nobody to hand the flow to, so
      // block it locally and keep the filter past the temporary window.
      if (wire_.install(label, now, cfg_.escalated_filter_ttl) ==
          WireFilterTable::InstallResult::TableFull)
        ++metrics_.table_full_events;
      ++metrics_.local_only_labels;
      schedule_sweep(out);
      continue;
    }
    if (agw == id_) {
      append(out, handle_as_own_gateway(label, strike, now));
      continue;
    }

    install_temp(label, now, out);
    batches[{agw, strike == ShadowResult::FirstStrike}].push_back(label);
  }

  for (auto& [key, labels] : batches) {
    for (std::size_t i = 0; i < labels.size(); i += kMaxLabelsPerMessage) {
      const std::size_t n =
          std::min(kMaxLabelsPerMessage, labels.size() - i);
      start_handshake(
          std::vector<FlowLabel>(labels.begin() + i, labels.begin() + i + n),
          key.first, victim, key.second, now, out);
    }
  }
  return out;
}

StepResult AitfRouter::on_synack(const AitfMessage& msg, double now,
                                 bool* intercepted) {
  StepResult out;
  (void)now;
  *intercepted = false;
  if (classify_message(msg) != MessageKind::SynAck) return out;
  if (!is_client(msg.target)) return out;  // not for a host of ours

  const std::uint64_t digest =
      label_digest(msg.origin, msg.target, msg.flow_labels);
  auto dit = by_digest_.find(digest);
  if (dit == by_digest_.end()) return out;  // unknown handshake: pass through

  auto hit = handshakes_.find(dit->second);
  by_digest_.erase(dit);
  if (hit == handshakes_.end()) return out;
  HandshakeState hs = std::move(hit->second);
  handshakes_.erase(hit);

  *intercepted = true;
  ++metrics_.handshakes_established;

  // Remote escalation rounds are settled by the peer taking responsibility.
  for (const FlowLabel& label : hs.labels) {
    if (label.src_kind != SourceKind::Gateway) continue;
    if (auto wit = wide_index_.find(label); wit != wide_index_.end()) {
      if (auto rit = escalations_.find(wit->second); rit != escalations_.end())
        rit->second.resolution = EscalationResolution::RemoteBlocked;
    }
  }

  AitfMessage ackm;
  ackm.flow_labels = msg.flow_labels;
  ackm.ack = true;
  ackm.nonce = msg.nonce;
  ackm.origin = id_;
  ackm.target = msg.target;
  out.actions.push_back(SendControl{msg.origin, std::move(ackm)});
  return out;
}

StepResult AitfRouter::escalate(const FlowLabel& label, NodeId attacker_gateway,
                                double now) {
  StepResult out;
  const bool already_wide = label.src_kind == SourceKind::Gateway;
  if (!already_wide && attacker_gateway == kNoNode) {
    // Nothing to widen to; per-source local block is all that is possible.
    if (wire_.install(label, now, cfg_.escalated_filter_ttl) ==
        WireFilterTable::InstallResult::TableFull)
      ++metrics_.table_full_events;
    ++metrics_.local_only_labels;
    schedule_sweep(out);
    return out;
  }
  const FlowLabel wide =
      already_wide ? label
                   : FlowLabel{label.dst, SourceKind::Gateway,
                               attacker_gateway};

  auto [rit, fresh] = escalations_.try_emplace(
      label, EscalationRecord{label, 1, EscalationResolution::Pending});
  EscalationRecord& rec = rit->second;
  if (!fresh && (rec.resolution == EscalationResolution::LocallyBlocked ||
                 rec.resolution == EscalationResolution::Unresolvable))
    return out;  // already settled
  if (!fresh && rec.resolution == EscalationResolution::Pending)
    return out;  // remote round still in flight
  if (fresh) {
    ++metrics_.escalations;
    const NodeId victim = label_dst_host(label);
    if (victim != kNoNode) ++escalations_by_victim_[victim];
  }

  // Action 1: block the gateway aggregate locally if resources allow.
  if (wire_.find(wide) != nullptr || wire_.has_spare_capacity()) {
    wire_.install(wide, now, cfg_.escalated_filter_ttl);
    rec.resolution = EscalationResolution::LocallyBlocked;
    schedule_sweep(out);
    return out;
  }

  // Action 2: with full path knowledge, replay the algorithm against the
  // border router just past the attacker's gateway.
  if (cfg_.antispoof == AntiSpoofMode::Wide && !already_wide &&
      evidence_ != nullptr) {
    if (const AntiSpoofStamp* stamp = evidence_->stamp_for(label);
        stamp != nullptr && stamp->full_path) {
      const auto& path = *stamp->full_path;
      NodeId deeper = kNoNode;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i] == attacker_gateway) {
          deeper = path[i + 1];
          break;
        }
      }
      if (deeper != kNoNode && deeper != id_) {
        wide_index_[wide] = label;
        rec.resolution = EscalationResolution::Pending;
        start_handshake({wide}, deeper, label_dst_host(label), false, now,
                        out);
        return out;
      }
    }
  }

  // No capacity and no deeper router: record the attempt and the failure.
  if (wire_.install(wide, now, cfg_.escalated_filter_ttl) ==
      WireFilterTable::InstallResult::TableFull) {
    ++metrics_.table_full_events;
    ++metrics_.unresolvable;
    rec.resolution = EscalationResolution::Unresolvable;
  } else {
    rec.resolution = EscalationResolution::LocallyBlocked;
    schedule_sweep(out);
  }
  return out;
}

StepResult AitfRouter::on_syn(const AitfMessage& msg, double packet_sent_at,
                              double now) {
  StepResult out;
  if (classify_message(msg) != MessageKind::Syn) {
    ++metrics_.invalid_messages;
    return out;
  }
  if (policy_ == GatewayPolicy::Unresponsive) {
    ++metrics_.ignored_syns;
    return out;
  }
  // The nonce binds the labels' own victim, and the SYN/ACK is addressed
  // there: an off-path requester never sees it.
  const NodeId victim = common_dst_host(msg.flow_labels);
  if (victim == kNoNode) {
    ++metrics_.invalid_messages;
    return out;
  }
  const std::uint64_t nonce =
      make_nonce(key_, victim, msg.flow_labels, nonce_epoch(now));
  if (policy_ == GatewayPolicy::CompromisedOnOff)
    cheat_syn_times_[nonce] = packet_sent_at;

  AitfMessage synack;
  synack.flow_labels = msg.flow_labels;
  synack.syn = true;
  synack.ack = true;
  synack.nonce = nonce;
  synack.origin = id_;
  synack.target = victim;
  out.actions.push_back(SendControl{victim, std::move(synack)});
  return out;
}

StepResult AitfRouter::on_ack(const AitfMessage& msg, double now) {
  StepResult out;
  if (classify_message(msg) != MessageKind::Ack) {
    ++metrics_.invalid_messages;
    return out;
  }
  const NodeId victim = common_dst_host(msg.flow_labels);
  if (victim == kNoNode ||
      !verify_nonce(key_, victim, msg.flow_labels, msg.nonce, now)) {
    ++metrics_.bad_nonce;
    return out;  // dropped silently
  }

  if (policy_ == GatewayPolicy::CompromisedOnOff) {
    // Plays along with the handshake, then resumes forwarding the moment
    // the requester's temporary filter lapses. No filter, no relay.
    double until = now + cfg_.temp_filter_timeout;
    if (auto it = cheat_syn_times_.find(msg.nonce);
        it != cheat_syn_times_.end()) {
      until = it->second + cfg_.temp_filter_timeout;
      cheat_syn_times_.erase(it);
    }
    out.actions.push_back(SuppressFlows{msg.flow_labels, until});
    return out;
  }

  for (const FlowLabel& label : msg.flow_labels) {
    shadow_.check(label, now, cfg_.filtering_window);
    install_temp(label, now, out);
    if (label.src_kind == SourceKind::Host) {
      if (is_client(label.src)) {
        out.actions.push_back(RelayRequest{label.src, relay_message(label)});
        ++metrics_.requests_relayed;
      }
      // A non-client source means the stamp was wrong; the filter stays
      // as installed but there is nobody to relay to.
    } else {
      out.actions.push_back(SendControl{label.src, relay_message(label)});
      ++metrics_.requests_relayed;
    }
  }
  return out;
}

StepResult AitfRouter::on_request_as_source(const AitfMessage& msg,
                                            double now) {
  StepResult out;
  if (classify_message(msg) != MessageKind::Request) {
    ++metrics_.invalid_messages;
    return out;
  }
  if (policy_ != GatewayPolicy::Cooperative) return out;
  for (const FlowLabel& label : msg.flow_labels) {
    if (label.src_kind != SourceKind::Gateway || label.src != id_) continue;
    // Stop forwarding the aggregate for the filtering window.
    if (wire_.install(label, now, cfg_.filtering_window) ==
        WireFilterTable::InstallResult::TableFull)
      ++metrics_.table_full_events;
  }
  schedule_sweep(out);
  return out;
}

StepResult AitfRouter::on_timer(TimerKind kind, std::uint64_t key,
                                double now) {
  StepResult out;
  if (kind == TimerKind::HandshakeGrace) {
    auto it = handshakes_.find(key);
    if (it == handshakes_.end()) return out;  // answered in time
    HandshakeState hs = std::move(it->second);
    handshakes_.erase(it);
    by_digest_.erase(label_digest(hs.peer_gateway, hs.victim, hs.labels));
    ++metrics_.handshakes_failed;

    for (const FlowLabel& label : hs.labels) {
      if (label.src_kind == SourceKind::Gateway) {
        // A remote escalation round timed out; fall back to blocking the
        // aggregate locally.
        auto wit = wide_index_.find(label);
        EscalationRecord* rec = nullptr;
        if (wit != wide_index_.end()) {
          if (auto rit = escalations_.find(wit->second);
              rit != escalations_.end())
            rec = &rit->second;
        }
        if (wire_.find(label) != nullptr || wire_.has_spare_capacity()) {
          wire_.install(label, now, cfg_.escalated_filter_ttl);
          if (rec) rec->resolution = EscalationResolution::LocallyBlocked;
          schedule_sweep(out);
        } else {
          ++metrics_.table_full_events;
          ++metrics_.unresolvable;
          if (rec) rec->resolution = EscalationResolution::Unresolvable;
        }
      } else {
        append(out, escalate(label, hs.peer_gateway, now));
      }
    }
    return out;
  }

  // FilterExpirySweep
  for (const WireFilter& gone : wire_.expire(now)) {
    const ShadowEntry* se = shadow_.find(gone.label, now);
    // Second agreement inside the shadow window that still caught traffic:
    // the source is playing the on-off game.
    const bool violated = se != nullptr && se->strikes >= 1 && gone.hit_bits > 0;
    if (!violated) continue;
    if (gone.label.src_kind == SourceKind::Host && is_client(gone.label.src)) {
      if (cfg_.sanction == SanctionPolicy::Disconnect) {
        out.actions.push_back(DisconnectHost{gone.label.src});
        ++metrics_.sanctions_disconnect;
      } else {
        if (wire_.install(gone.label, now, cfg_.filtering_window) ==
            WireFilterTable::InstallResult::TableFull)
          ++metrics_.table_full_events;
        ++metrics_.sanctions_filter;
      }
    } else if (gone.label.src_kind == SourceKind::Gateway) {
      // Downstream router that keeps forwarding: hold its aggregate blocked.
      if (wire_.install(gone.label, now, cfg_.filtering_window) ==
          WireFilterTable::InstallResult::TableFull)
        ++metrics_.table_full_events;
      else
        ++metrics_.sanctions_filter;
    }
  }
  schedule_sweep(out);
  return out;
}

std::uint64_t AitfRouter::escalations_for(NodeId victim) const {
  auto it = escalations_by_victim_.find(victim);
  return it == escalations_by_victim_.end() ? 0 : it->second;
}

const EscalationRecord* AitfRouter::escalation_record(
    const FlowLabel& label) const {
  auto it = escalations_.find(label);
  return it == escalations_.end() ? nullptr : &it->second;
}

std::size_t AitfRouter::state_size() const {
  return handshakes_.size() + by_digest_.size() + cheat_syn_times_.size();
}

// ---------------------------------------------------------------------------

// The victim paces itself below its contract: a short burst, then the
// contracted rate. A backlog of k*R labels therefore drains in about k
// seconds, which is what the provider-side accounting expects to see.
VictimHost::VictimHost(NodeId id, NodeId gateway, double request_rate)
    : id_(id), gateway_(gateway), request_rate_(request_rate),
      bucket_(request_rate, std::max(1.0, request_rate * 0.125)) {}

void VictimHost::note_undesired_flow(const FlowLabel& label,
                                     double flow_rate_bps) {
  if (queued_.contains(label)) return;
  queued_.insert(label);
  queue_.push(Queued{flow_rate_bps, seq_++, label});
}

VictimHost::DrainResult VictimHost::drain(double now) {
  DrainResult result;
  if (queue_.empty()) return result;

  const double avail = bucket_.available(now);
  std::size_t n = static_cast<std::size_t>(std::floor(avail + 1e-9));
  n = std::min(n, queue_.size());
  if (n > 0 && bucket_.admit(static_cast<double>(n), now)) {
    std::vector<FlowLabel> chunk;
    chunk.reserve(std::min(n, kMaxLabelsPerMessage));
    for (std::size_t i = 0; i < n; ++i) {
      const Queued q = queue_.top();
      queue_.pop();
      queued_.erase(q.label);
      requested_.insert(q.label);
      chunk.push_back(q.label);
      if (chunk.size() == kMaxLabelsPerMessage) {
        AitfMessage msg;
        msg.flow_labels = std::move(chunk);
        msg.origin = id_;
        msg.target = id_;
        result.messages.push_back(std::move(msg));
        chunk.clear();
      }
    }
    if (!chunk.empty()) {
      AitfMessage msg;
      msg.flow_labels = std::move(chunk);
      msg.origin = id_;
      msg.target = id_;
      result.messages.push_back(std::move(msg));
    }
    labels_sent_ += n;
  }
  if (!queue_.empty())
    result.retry_at = now + std::max(0.01, 1.0 / request_rate_);
  return result;
}

bool VictimHost::already_requested(const FlowLabel& label) const {
  return requested_.contains(label);
}

// ---------------------------------------------------------------------------

AttackerHost::PauseDecision AttackerHost::on_filter_request(
    double relay_sent_at, double now, double filtering_window,
    double temp_filter_timeout) const {
  switch (policy_) {
    case AttackerPolicy::Compliant:
      return {true, now + filtering_window};
    case AttackerPolicy::OnOff:
      // Pretends to comply, resuming the instant the gateway's temporary
      // filter is gone.
      return {true, std::max(now, relay_sent_at + temp_filter_timeout)};
    case AttackerPolicy::Deaf:
      return {false, 0};
  }
  return {false, 0};
}

}  // namespace aitf
