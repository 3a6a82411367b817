#include "aitf/simnet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "aitf/log.hpp"

namespace aitf {

std::pair<double, double> proportional_share(double offered_first,
                                             double offered_second,
                                             double capacity_bps) {
  const double total = offered_first + offered_second;
  if (total <= capacity_bps || total <= 0)
    return {offered_first, offered_second};
  const double f = capacity_bps / total;
  return {offered_first * f, offered_second * f};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AitfHop {
  AitfRouter* agent;
  std::uint32_t links_upto;  // links occupied when blocked at this router
};

struct SimFlow {
  std::uint32_t id = 0;
  FlowSpec spec;
  FlowLabel label;
  Packet proto;  // representative packet for filter matching
  std::vector<std::uint32_t> links;
  std::vector<NodeId> border_routers;
  std::vector<AitfHop> aitf_hops;

  // protocol-driven state
  double paused_until = -1;
  double suppressed_until = -1;
  bool disconnected = false;

  // per-tick scratch
  bool on = false;
  double rate = 0;
  std::uint32_t active_links = 0;
  AitfRouter* matched_agent = nullptr;
  FlowLabel matched_label;
  bool delivered_now = false;

  // accounting
  double offered_bits = 0;
  double delivered_bits = 0;
  double filter_bits = 0;
  double congestion_bits = 0;

  // victim-side detection and response tracking
  bool delivered_prev = false;
  bool sight_pending = false;
  bool requested = false;
  double first_request_at = kInf;
  double last_delivered_in_window = -1;
};

struct ControlPacket {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  double sent_at = 0;
  AitfMessage msg;
  bool gateway_stage = false;
};

enum class EvKind : std::uint8_t { Tick, Control, Timer, Detect, Drain };

// Event times live on an integer-microsecond lattice: scheduling is exact,
// ties are broken by causal order, and no float rounding can reorder two
// events. Handlers still see seconds.
struct Event {
  std::uint64_t at_us = 0;
  std::uint64_t seq = 0;
  EvKind kind = EvKind::Tick;
  ControlPacket pkt;
  NodeId node = kNoNode;  // Timer router / Drain victim
  TimerKind tkind = TimerKind::HandshakeGrace;
  std::uint64_t tkey = 0;
  std::uint32_t flow = 0;      // Detect
  std::uint64_t tick_no = 0;   // Tick
};

struct EventCmp {
  bool operator()(const Event& a, const Event& b) const {
    return a.at_us != b.at_us ? a.at_us > b.at_us : a.seq > b.seq;
  }
};

std::uint64_t near_us(double seconds) {
  return static_cast<std::uint64_t>(std::llround(seconds * 1e6));
}

// Smallest lattice point whose double value is not below `seconds`; timers
// must never fire before the deadline they were armed for.
std::uint64_t ceil_us(double seconds) {
  auto v = static_cast<std::uint64_t>(std::ceil(seconds * 1e6 - 1e-6));
  while (static_cast<double>(v) * 1e-6 < seconds) ++v;
  return v;
}

class FlowEvidence : public StampEvidence {
 public:
  const AntiSpoofStamp* stamp_for(const FlowLabel& label) const override {
    auto it = map_.find(label);
    return it == map_.end() ? nullptr : it->second;
  }
  std::unordered_map<FlowLabel, const AntiSpoofStamp*, FlowLabelHash> map_;
};

struct VictimRuntime {
  VictimHost host;
  bool drain_pending = false;

  explicit VictimRuntime(VictimHost h) : host(std::move(h)) {}
};

struct LinkUse {
  std::uint32_t flow;
  std::uint32_t pos;
};

}  // namespace

struct Simulation::Impl {
  ScenarioConfig cfg;
  const Topology& topo;
  ProtocolConfig pcfg;
  double dt;

  std::vector<FlowSpec> specs;
  std::vector<SimFlow> flows;
  std::unordered_map<FlowLabel, std::uint32_t, FlowLabelHash> flow_by_label;
  std::unordered_map<NodeId, std::vector<std::uint32_t>> flows_by_src;
  std::map<NodeId, VictimRuntime> victims;
  std::map<NodeId, std::vector<std::uint32_t>> victim_attack_flows;
  std::map<NodeId, std::vector<std::uint32_t>> victim_all_flows;
  std::unordered_map<NodeId, AitfRouter> routers;
  std::unordered_map<NodeId, AttackerHost> attackers;
  FlowEvidence evidence;

  std::vector<std::vector<LinkUse>> link_flows;
  std::vector<double> link_caps;
  // access link index -> victim's position in the ordered victim map
  std::unordered_map<std::uint32_t, std::size_t> access_link_victim;

  std::priority_queue<Event, std::vector<Event>, EventCmp> events;
  std::uint64_t seq = 0;
  double now = 0;
  std::uint64_t now_us = 0;
  std::uint64_t dt_us = 0;
  std::uint64_t n_ticks = 0;

  RunResult result;

  Impl(const ScenarioConfig& c, const Topology& t) : cfg(c), topo(t) {
    cfg.validate();
    pcfg = protocol_config_from(cfg);
    dt = cfg.measurement_interval_s;
    build();
  }

  AitfRouter* agent(NodeId router) {
    auto it = routers.find(router);
    return it == routers.end() ? nullptr : &it->second;
  }

  void push(Event e) {
    e.seq = seq++;
    events.push(std::move(e));
  }

  void build();
  void add_flow(FlowSpec spec, Rng& rng_stamp,
                const std::vector<NodeId>& universe);
  RunResult run();
  void handle_tick(std::uint64_t k);
  void handle_control(const ControlPacket& pkt);
  void apply_actions(NodeId router, StepResult&& sr);
  void send_control(NodeId src, NodeId dst, AitfMessage msg);
  void do_drain(NodeId victim);
  void finalize();
};

void Simulation::Impl::build() {
  const std::uint32_t n_edge = cfg.n_edge_domains;
  std::uint32_t n_gw = cfg.n_gateways;
  if (n_gw == 0) n_gw = std::min(cfg.n_attackers, n_edge > 1 ? n_edge - 1 : 0);
  if (n_gw == 0)
    throw ConfigError(
        "[attack] needs at least 2 [topology] edge_domains (one victim "
        "domain plus attacker domains)");

  Rng rng(cfg.seed);
  Rng rng_stamp = rng.fork(10);
  Rng rng_keys = rng.fork(11);

  const std::vector<NodeId> universe = topo.all_border_routers();

  // Protocol agents: one per deployed border router. The scenario's gateway
  // policy applies to the attacker-side domains; everyone else cooperates.
  for (const Domain& d : topo.domains()) {
    const NodeId r = d.router;
    const NonceKey key{rng_keys.next_u64(), rng_keys.next_u64()};
    if (!d.aitf) continue;
    GatewayPolicy policy = GatewayPolicy::Cooperative;
    if (d.kind == DomainKind::Edge && d.id >= 1 && d.id <= n_gw)
      policy = cfg.gateway_policy;
    auto [it, ok] = routers.emplace(r, AitfRouter(r, pcfg, policy, key));
    for (NodeId h : d.hosts) it->second.add_client(h);
  }

  // Per-domain host cursors; the victim domain's first hosts are victims.
  std::vector<std::uint32_t> cursor(topo.domains().size(), 0);
  cursor[0] = cfg.victim_count;
  auto take_host = [&](std::uint32_t domain) -> NodeId {
    const Domain& d = topo.domains()[domain];
    if (cursor[domain] >= d.hosts.size())
      throw ConfigError(
          "[topology] hosts_per_edge too small for the requested attacker "
          "and good-flow placement");
    return d.hosts[cursor[domain]++];
  };

  const auto& victim_hosts = topo.domains()[0].hosts;
  for (std::uint32_t i = 0; i < cfg.victim_count; ++i) {
    const NodeId v = victim_hosts[i];
    victims.emplace(
        v, VictimRuntime(VictimHost(v, topo.gateway_of_host(v),
                                    cfg.request_rate)));
    victim_attack_flows[v];
    victim_all_flows[v];
  }

  // Good traffic first (flow ids then follow detection priority ties).
  const std::uint32_t n_good = cfg.baseline_goodput_bps > 0 ? cfg.n_good_flows
                                                            : 0;
  const auto colocated = static_cast<std::uint32_t>(
      std::llround(cfg.good_colocated_fraction * n_good));
  const std::uint32_t clean_pool =
      n_edge > n_gw + 1 ? n_edge - 1 - n_gw : 0;
  if (n_good > colocated && clean_pool == 0)
    throw ConfigError(
        "[victims] good traffic needs edge domains beyond the attacker "
        "gateways; raise [topology] edge_domains or colocate all of it");

  for (std::uint32_t i = 0; i < cfg.victim_count; ++i) {
    const NodeId v = victim_hosts[i];
    for (std::uint32_t g = 0; g < n_good; ++g) {
      const bool colo = g < colocated;
      const std::uint32_t domain =
          colo ? 1 + (g % n_gw) : 1 + n_gw + (g % clean_pool);
      FlowSpec s;
      s.src = take_host(domain);
      s.dst = v;
      s.rate_bps = cfg.baseline_goodput_bps / n_good;
      s.kind = PacketKind::Good;
      s.start_at = 0;
      add_flow(s, rng_stamp, universe);
    }
  }
  // Attack flows, one per (victim, attacker), spread over gateway domains.
  for (std::uint32_t i = 0; i < cfg.victim_count; ++i) {
    const NodeId v = victim_hosts[i];
    for (std::uint32_t j = 0; j < cfg.n_attackers; ++j) {
      FlowSpec s;
      s.src = take_host(1 + (j % n_gw));
      s.dst = v;
      s.rate_bps = cfg.attack_total_bps / cfg.n_attackers;
      s.kind = PacketKind::Attack;
      s.policy = cfg.attacker_policy;
      s.start_at = cfg.attack_start_s;
      add_flow(s, rng_stamp, universe);
    }
  }

  link_caps.resize(topo.links().size());
  for (std::size_t i = 0; i < topo.links().size(); ++i)
    link_caps[i] = topo.links()[i].capacity_bps;
  link_flows.assign(topo.links().size(), {});
  for (const SimFlow& f : flows)
    for (std::uint32_t pos = 0; pos < f.links.size(); ++pos)
      link_flows[f.links[pos]].push_back(LinkUse{f.id, pos});

  std::size_t victim_pos = 0;
  for (auto& [v, rt] : victims)
    access_link_victim[topo.link_between(v, topo.gateway_of_host(v))] =
        victim_pos++;

  // Flow storage is final now; stamps can be referenced in place.
  for (const SimFlow& f : flows)
    if (f.spec.kind == PacketKind::Attack)
      evidence.map_[f.label] = &f.proto.stamp;
  for (auto& [r, agent] : routers) agent.set_evidence(&evidence);

  dt_us = near_us(dt);
  n_ticks = static_cast<std::uint64_t>(std::llround(cfg.duration_s / dt));
  result.samples.reserve(n_ticks * victims.size());
  result.extras.reserve(n_ticks * victims.size());
}

void Simulation::Impl::add_flow(FlowSpec spec, Rng& rng_stamp,
                                const std::vector<NodeId>& universe) {
  SimFlow f;
  f.id = static_cast<std::uint32_t>(flows.size());
  f.spec = spec;
  f.label = host_label(spec.dst, spec.src);
  f.links = topo.route_links(spec.src, spec.dst);
  f.border_routers = topo.border_path(spec.src, spec.dst);

  Packet proto;
  proto.src = spec.src;
  proto.dst = spec.dst;
  proto.kind = spec.kind;
  f.proto = stamp_packet(proto, f.border_routers, cfg.antispoof,
                         cfg.false_id_prob, universe, rng_stamp);

  for (std::uint32_t i = 0; i < f.border_routers.size(); ++i)
    if (AitfRouter* a = agent(f.border_routers[i]))
      f.aitf_hops.push_back(AitfHop{a, i + 1});

  specs.push_back(spec);
  flows_by_src[spec.src].push_back(f.id);
  if (spec.kind == PacketKind::Attack) {
    victim_attack_flows[spec.dst].push_back(f.id);
    flow_by_label[f.label] = f.id;
    attackers.emplace(spec.src, AttackerHost(spec.src, spec.policy));
  }
  victim_all_flows[spec.dst].push_back(f.id);
  flows.push_back(std::move(f));
}

void Simulation::Impl::send_control(NodeId src, NodeId dst, AitfMessage msg) {
  Event e;
  e.kind = EvKind::Control;
  e.pkt.src = src;
  e.pkt.dst = dst;
  e.pkt.sent_at = now;
  e.pkt.msg = std::move(msg);
  if (topo.is_router(dst)) {
    e.pkt.gateway_stage = false;
    e.at_us = near_us(now + topo.one_way_delay(src, dst));
  } else {
    e.pkt.gateway_stage = true;
    e.at_us = near_us(now + topo.one_way_delay(src, topo.gateway_of_host(dst)));
  }
  push(std::move(e));
}

void Simulation::Impl::apply_actions(NodeId router, StepResult&& sr) {
  for (ProtocolAction& action : sr.actions) {
    if (auto* send = std::get_if<SendControl>(&action)) {
      send_control(router, send->dst, std::move(send->msg));
    } else if (auto* relay = std::get_if<RelayRequest>(&action)) {
      send_control(router, relay->host, std::move(relay->msg));
    } else if (auto* sup = std::get_if<SuppressFlows>(&action)) {
      for (const FlowLabel& label : sup->labels) {
        auto it = flow_by_label.find(label);
        if (it == flow_by_label.end()) continue;
        SimFlow& f = flows[it->second];
        f.suppressed_until = std::max(f.suppressed_until, sup->until);
      }
    } else if (auto* disc = std::get_if<DisconnectHost>(&action)) {
      auto it = flows_by_src.find(disc->host);
      if (it == flows_by_src.end()) continue;
      for (std::uint32_t fid : it->second) flows[fid].disconnected = true;
    } else if (auto* timer = std::get_if<StartTimer>(&action)) {
      Event e;
      e.kind = EvKind::Timer;
      e.at_us = std::max(ceil_us(timer->at), now_us);
      e.node = router;
      e.tkind = timer->kind;
      e.tkey = timer->key;
      push(std::move(e));
    }
  }
}

void Simulation::Impl::do_drain(NodeId victim) {
  VictimRuntime& rt = victims.at(victim);
  VictimHost::DrainResult res = rt.host.drain(now);
  for (AitfMessage& msg : res.messages) {
    for (const FlowLabel& label : msg.flow_labels) {
      auto it = flow_by_label.find(label);
      if (it == flow_by_label.end()) continue;
      SimFlow& f = flows[it->second];
      if (!f.requested) {
        f.requested = true;
        f.first_request_at = now;
      }
    }
    send_control(victim, rt.host.gateway(), std::move(msg));
  }
  if (res.retry_at > 0 && !rt.drain_pending) {
    rt.drain_pending = true;
    Event e;
    e.kind = EvKind::Drain;
    e.at_us = near_us(res.retry_at);
    e.node = victim;
    push(std::move(e));
  }
}

void Simulation::Impl::handle_control(const ControlPacket& pkt) {
  const MessageKind kind = classify_message(pkt.msg);

  if (pkt.gateway_stage) {
    const NodeId gw = topo.gateway_of_host(pkt.dst);
    if (AitfRouter* a = agent(gw); a != nullptr &&
                                   kind == MessageKind::SynAck) {
      bool intercepted = false;
      apply_actions(gw, a->on_synack(pkt.msg, now, &intercepted));
      if (intercepted) return;  // answered on the victim's behalf
    }
    Event e;
    e.kind = EvKind::Control;
    e.pkt = pkt;
    e.pkt.gateway_stage = false;
    e.at_us = near_us(now + topo.host_link_delay(pkt.dst));
    push(std::move(e));
    return;
  }

  if (topo.is_router(pkt.dst)) {
    AitfRouter* a = agent(pkt.dst);
    if (a == nullptr) return;  // legacy router: the message means nothing
    switch (kind) {
      case MessageKind::Syn:
        apply_actions(pkt.dst, a->on_syn(pkt.msg, pkt.sent_at, now));
        break;
      case MessageKind::Ack:
        apply_actions(pkt.dst, a->on_ack(pkt.msg, now));
        break;
      case MessageKind::Request:
        if (a->is_client(pkt.msg.origin))
          apply_actions(pkt.dst, a->on_victim_request(pkt.msg, now));
        else
          apply_actions(pkt.dst, a->on_request_as_source(pkt.msg, now));
        break;
      default:
        break;
    }
    return;
  }

  // Host delivery.
  if (kind == MessageKind::Request) {
    auto it = attackers.find(pkt.dst);
    if (it == attackers.end()) return;
    const AttackerHost::PauseDecision d =
        it->second.on_filter_request(pkt.sent_at, now, pcfg.filtering_window,
                                     pcfg.temp_filter_timeout);
    if (!d.pause) return;
    for (const FlowLabel& label : pkt.msg.flow_labels) {
      auto fit = flow_by_label.find(label);
      if (fit == flow_by_label.end()) continue;
      SimFlow& f = flows[fit->second];
      if (f.spec.src == pkt.dst)
        f.paused_until = std::max(f.paused_until, d.until);
    }
  }
  // Anything else reaching a host (e.g. an unclaimed SYN/ACK) is dropped.
}

void Simulation::Impl::handle_tick(std::uint64_t k) {
  const double t = now;

  // Rows carry state at the window start; bandwidths fill in below.
  const std::size_t row0 = result.samples.size();
  for (auto& [v, rt] : victims) {
    AitfRouter* vgw = agent(rt.host.gateway());
    GoodputSample s;
    s.t = t;
    s.victim = v;
    if (vgw != nullptr) {
      vgw->shadow().sweep(t);
      s.vgw_filters = vgw->wire().size();
      s.shadow_entries = vgw->shadow().size();
      s.escalations_cum = vgw->escalations_for(v);
    }
    s.requests_cum = rt.host.labels_sent();
    result.samples.push_back(s);
    result.extras.push_back(SampleExtra{});
  }

  // Fluid pass 1: source state and the first matching filter on the path.
  for (SimFlow& f : flows) {
    f.on = t >= f.spec.start_at && !f.disconnected && t >= f.paused_until &&
           t >= f.suppressed_until;
    f.rate = f.on ? f.spec.rate_bps : 0;
    f.active_links = static_cast<std::uint32_t>(f.links.size());
    f.matched_agent = nullptr;
    if (!f.on) continue;
    for (const AitfHop& hop : f.aitf_hops) {
      if (hop.agent->wire().size() == 0) continue;
      if (const WireFilter* m = hop.agent->wire().find_match(f.proto, t)) {
        f.active_links = hop.links_upto;
        f.matched_agent = hop.agent;
        f.matched_label = m->label;
        break;
      }
    }
  }

  // Fluid pass 2: capacity sharing, proportional on each saturated link.
  // Rates only shrink, so every link constraint holds afterwards. The
  // attack volume entering each victim's access link is captured here,
  // before that link's own scaling.
  for (std::size_t l = 0; l < link_flows.size(); ++l) {
    const auto& uses = link_flows[l];
    if (uses.empty()) continue;
    double sum = 0;
    for (const LinkUse& u : uses) {
      const SimFlow& f = flows[u.flow];
      if (f.rate > 0 && u.pos < f.active_links) sum += f.rate;
    }
    if (sum <= 0) continue;
    if (auto vit = access_link_victim.find(static_cast<std::uint32_t>(l));
        vit != access_link_victim.end()) {
      double entry_attack = 0;
      for (const LinkUse& u : uses) {
        const SimFlow& f = flows[u.flow];
        if (f.rate > 0 && u.pos < f.active_links &&
            f.spec.kind == PacketKind::Attack)
          entry_attack += f.rate;
      }
      result.extras[row0 + vit->second].attack_at_access_bps = entry_attack;
    }
    if (sum > link_caps[l]) {
      const double factor = link_caps[l] / sum;
      for (const LinkUse& u : uses) {
        SimFlow& f = flows[u.flow];
        if (f.rate > 0 && u.pos < f.active_links) f.rate *= factor;
      }
    }
  }

  // Accounting.
  for (SimFlow& f : flows) {
    const double raw = f.on ? f.spec.rate_bps : 0;
    const double offered = raw * dt;
    f.offered_bits += offered;
    result.conservation.offered_bits += offered;
    const bool blocked = f.active_links < f.links.size();
    if (blocked) {
      const double dropped = f.rate * dt;
      f.matched_agent->wire().add_hit_bits(f.matched_label, dropped);
      f.filter_bits += dropped;
      result.conservation.filter_dropped_bits += dropped;
      const double lost = offered - dropped;
      f.congestion_bits += lost;
      result.conservation.congestion_dropped_bits += lost;
      f.delivered_now = false;
    } else {
      const double delivered = f.rate * dt;
      f.delivered_bits += delivered;
      result.conservation.delivered_bits += delivered;
      const double lost = offered - delivered;
      f.congestion_bits += lost;
      result.conservation.congestion_dropped_bits += lost;
      f.delivered_now = f.rate > 0;
    }
  }

  // Victim rows: delivered bandwidth plus protocol bookkeeping.
  {
    std::size_t row = row0;
    for (auto& [v, rt] : victims) {
      GoodputSample& s = result.samples[row];
      SampleExtra& x = result.extras[row];
      for (std::uint32_t fid : victim_all_flows[v]) {
        const SimFlow& f = flows[fid];
        const bool blocked = f.active_links < f.links.size();
        const double delivered = blocked ? 0 : f.rate;
        if (f.spec.kind == PacketKind::Good) s.good_bps += delivered;
        else s.attack_bps += delivered;
      }
      for (std::uint32_t fid : victim_attack_flows[v]) {
        const SimFlow& f = flows[fid];
        if (t < f.spec.start_at) continue;
        x.attack_started_bps += f.spec.rate_bps;
        const bool blocked = f.active_links < f.links.size();
        if (!f.on || blocked) x.attack_stopped_bps += f.spec.rate_bps;
      }
      ++row;
    }
  }

  // Detection: a flow becoming visible at the victim schedules a sighting;
  // recurring flows are recognized faster than new ones.
  for (auto& [v, flist] : victim_attack_flows) {
    VictimRuntime& rt = victims.at(v);
    for (std::uint32_t fid : flist) {
      SimFlow& f = flows[fid];
      if (f.delivered_now && !f.delivered_prev && !f.sight_pending) {
        const double delay = rt.host.already_requested(f.label)
                                 ? kRecurringDetectDelay
                                 : kFirstDetectDelay;
        Event e;
        e.kind = EvKind::Detect;
        e.at_us = near_us(t + delay);
        e.flow = fid;
        push(std::move(e));
        f.sight_pending = true;
      }
      f.delivered_prev = f.delivered_now;
      if (f.requested && t >= f.first_request_at &&
          t < f.first_request_at + pcfg.filtering_window && f.delivered_now)
        f.last_delivered_in_window = t + dt;
    }
  }

  if (k + 1 < n_ticks) {
    Event e;
    e.kind = EvKind::Tick;
    e.at_us = (k + 1) * dt_us;
    e.tick_no = k + 1;
    push(std::move(e));
  }
}

RunResult Simulation::Impl::run() {
  const auto wall0 = std::chrono::steady_clock::now();

  if (n_ticks > 0) {
    Event e;
    e.kind = EvKind::Tick;
    e.at_us = 0;
    e.tick_no = 0;
    push(std::move(e));
  }

  const std::uint64_t duration_us = near_us(cfg.duration_s);
  while (!events.empty()) {
    Event e = events.top();
    events.pop();
    now_us = e.at_us;
    now = static_cast<double>(now_us) * 1e-6;
    if (now_us > duration_us && e.kind != EvKind::Tick) continue;
    switch (e.kind) {
      case EvKind::Tick:
        handle_tick(e.tick_no);
        break;
      case EvKind::Control:
        handle_control(e.pkt);
        break;
      case EvKind::Timer:
        if (AitfRouter* a = agent(e.node))
          apply_actions(e.node, a->on_timer(e.tkind, e.tkey, now));
        break;
      case EvKind::Detect: {
        SimFlow& f = flows[e.flow];
        f.sight_pending = false;
        if (!f.delivered_prev) break;  // stopped before the sighting landed
        victims.at(f.spec.dst).host.note_undesired_flow(f.label,
                                                        f.spec.rate_bps);
        do_drain(f.spec.dst);
        break;
      }
      case EvKind::Drain:
        victims.at(e.node).drain_pending = false;
        do_drain(e.node);
        break;
    }
  }

  finalize();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();
  return std::move(result);
}

void Simulation::Impl::finalize() {
  for (auto& [v, rt] : victims) {
    VictimSummary sum;
    sum.victim = v;
    if (AitfRouter* vgw = agent(rt.host.gateway())) {
      sum.peak_vgw_filters = vgw->wire().peak_size();
      sum.peak_shadow_entries = vgw->shadow().peak_size();
      sum.escalations = vgw->escalations_for(v);
    }
    sum.requests_sent = rt.host.labels_sent();

    double frt_sum = 0;
    std::size_t frt_n = 0;
    for (std::uint32_t fid : victim_all_flows[v]) {
      const SimFlow& f = flows[fid];
      if (f.spec.kind == PacketKind::Good) {
        sum.offered_good_bits += f.offered_bits;
        sum.delivered_good_bits += f.delivered_bits;
      } else {
        sum.offered_attack_bits += f.offered_bits;
        sum.delivered_attack_bits += f.delivered_bits;
      }
      sum.filter_dropped_bits += f.filter_bits;
      sum.congestion_dropped_bits += f.congestion_bits;
    }
    for (std::uint32_t fid : victim_attack_flows[v]) {
      const SimFlow& f = flows[fid];
      FlowOutcome out;
      out.src = f.spec.src;
      out.dst = f.spec.dst;
      out.requested = f.requested;
      out.first_request_at = f.first_request_at;
      if (f.requested) {
        ++sum.flows_requested;
        const double window_end =
            std::min(f.first_request_at + pcfg.filtering_window,
                     cfg.duration_s);
        const bool unresolved =
            f.last_delivered_in_window >= window_end - 1.5 * dt;
        out.unresolved = unresolved;
        if (unresolved) {
          ++sum.flows_unresolved;
        } else {
          const double frt =
              std::max(0.0, f.last_delivered_in_window - f.first_request_at);
          out.response_time_s = frt;
          frt_sum += frt;
          sum.frt_max_s = std::max(sum.frt_max_s, frt);
          ++frt_n;
        }
      }
      result.attack_flow_outcomes.push_back(out);
    }
    if (frt_n > 0) sum.frt_mean_s = frt_sum / static_cast<double>(frt_n);
    result.summaries.push_back(sum);
  }

  for (const auto& [r, a] : routers) {
    result.handshakes_started += a.metrics().handshakes_started;
    result.handshakes_established += a.metrics().handshakes_established;
  }

  const double tolerance =
      std::max(1.0, 1e-9 * result.conservation.offered_bits);
  if (std::abs(result.conservation.imbalance()) > tolerance)
    throw SimError("conservation violated: offered bits do not reconcile "
                   "with delivered + dropped");
}

Simulation::Simulation(const ScenarioConfig& cfg, const Topology& topo)
    : impl_(std::make_unique<Impl>(cfg, topo)) {}

Simulation::~Simulation() = default;

RunResult Simulation::run() { return impl_->run(); }

const std::vector<FlowSpec>& Simulation::flow_specs() const {
  return impl_->specs;
}

AitfRouter* Simulation::router_agent(NodeId router) {
  return impl_->agent(router);
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  const Topology topo = generate_topology(topology_params_from(cfg));
  Simulation sim(cfg, topo);
  return sim.run();
}

}  // namespace aitf
