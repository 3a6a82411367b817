#ifndef AITF_SIMNET_HPP
#define AITF_SIMNET_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "aitf/protocol.hpp"
#include "aitf/scenario.hpp"
#include "aitf/topology.hpp"

namespace aitf {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reaction delays of a victim's detection pipeline: first sighting of a
// flow versus a flow it has already identified and had blocked before.
inline constexpr double kFirstDetectDelay = 1.0;
inline constexpr double kRecurringDetectDelay = 0.1;

struct FlowSpec {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  double rate_bps = 0;
  PacketKind kind = PacketKind::Good;
  AttackerPolicy policy = AttackerPolicy::Compliant;
  double start_at = 0;
};

// One measurement row: written every measurement interval per victim.
// Counters are sampled at the window start t; bandwidths are the delivery
// over [t, t + interval).
struct GoodputSample {
  double t = 0;
  NodeId victim = kNoNode;
  double good_bps = 0;
  double attack_bps = 0;
  std::size_t vgw_filters = 0;
  std::size_t shadow_entries = 0;
  std::uint64_t requests_cum = 0;
  std::uint64_t escalations_cum = 0;
};

// Companion per-row metrics that the CSV schema does not carry; used by
// analysis and tests.
struct SampleExtra {
  double attack_started_bps = 0;    // sum of launched attack flows' rates
  double attack_stopped_bps = 0;    // of those, currently stopped by the
                                    // protocol (paused, suppressed,
                                    // disconnected, or filtered)
  double attack_at_access_bps = 0;  // entering the victim access link
};

struct VictimSummary {
  NodeId victim = kNoNode;
  std::size_t flows_requested = 0;
  std::size_t flows_unresolved = 0;
  double frt_mean_s = 0;
  double frt_max_s = 0;
  std::size_t peak_vgw_filters = 0;
  std::size_t peak_shadow_entries = 0;
  std::uint64_t requests_sent = 0;
  std::uint64_t escalations = 0;
  double offered_attack_bits = 0;
  double delivered_attack_bits = 0;
  double offered_good_bits = 0;
  double delivered_good_bits = 0;
  double filter_dropped_bits = 0;
  double congestion_dropped_bits = 0;
};

// Every emitted bit is delivered, dropped by a filter, or lost to
// congestion; the three buckets reconcile exactly against the offered
// total (fluid model, no queues).
struct ConservationReport {
  double offered_bits = 0;
  double delivered_bits = 0;
  double filter_dropped_bits = 0;
  double congestion_dropped_bits = 0;

  double imbalance() const {
    return offered_bits -
           (delivered_bits + filter_dropped_bits + congestion_dropped_bits);
  }
};

struct FlowOutcome {
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  bool requested = false;
  double first_request_at = std::numeric_limits<double>::infinity();
  // Time from the first request naming the flow to its last delivered bit
  // within the filtering window; +inf (unresolved) if it was never blocked.
  double response_time_s = std::numeric_limits<double>::infinity();
  bool unresolved = false;
};

struct RunResult {
  std::vector<GoodputSample> samples;  // ordered by (t, victim)
  std::vector<SampleExtra> extras;     // parallel to samples
  std::vector<VictimSummary> summaries;
  std::vector<FlowOutcome> attack_flow_outcomes;
  ConservationReport conservation;
  std::uint64_t handshakes_started = 0;
  std::uint64_t handshakes_established = 0;
  double wall_seconds = 0;
};

// Delivered (first, second) shares of two offered loads competing for one
// link: proportional when saturated, unchanged otherwise.
std::pair<double, double> proportional_share(double offered_first,
                                             double offered_second,
                                             double capacity_bps);

// ---------------------------------------------------------------------------

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, const Topology& topo);
  ~Simulation();

  RunResult run();

  // Introspection used by tests.
  const std::vector<FlowSpec>& flow_specs() const;
  AitfRouter* router_agent(NodeId router);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Generates the topology from the scenario and runs it.
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace aitf

#endif  // AITF_SIMNET_HPP
