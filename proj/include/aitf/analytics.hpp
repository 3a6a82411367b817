#ifndef AITF_ANALYTICS_HPP
#define AITF_ANALYTICS_HPP

#include <cstdint>
#include <utility>

namespace aitf {

// Inputs to the closed-form performance model. Bandwidths in bits/s,
// times in seconds, counts dimensionless.
struct AttackProfile {
  double victim_bandwidth = 0;       // B_v
  double attack_bandwidth = 0;       // B_att (aggregate)
  double undesired_flows = 0;        // N_att
  double request_rate = 0;           // R (per victim, requests/s)
  double filtering_window = 0;       // T
  double temp_filter_timeout = 0;    // T_tmp
  double response_time = 0;          // T_fr (worst case per flow)
  double attacker_gateways = 0;      // N_agw
  double max_request_rate = 0;       // R_max (per gateway)
  double requested_flows = 0;        // X

  bool valid() const;
  // True when the expected separation T >> T_tmp is violated (T < 10*T_tmp).
  bool window_too_small() const;
};

// Lower bound on the bandwidth left to legitimate flows, clamped to
// [0, B_v]. With no undesired flows the whole link is preserved.
double preserved_bandwidth(const AttackProfile& profile);

// Upper bound on the bandwidth consumed by undesired flows, with
// X = min(R*T, N_att) substituted. Complements preserved_bandwidth:
// the two always sum to B_v.
double lost_bandwidth_bound(const AttackProfile& profile);

// Average bandwidth a single undesired flow consumes when it is blocked
// T_fr after each window of T. Both the exact form and the common
// approximation (dropping T_fr against T) are reported.
struct PerFlowLoss {
  double exact = 0;         // B * T_fr / (T + T_fr)
  double approximate = 0;   // B * T_fr / T
  double relative_gap = 0;  // (approximate - exact) / approximate
};
PerFlowLoss per_flow_consumed_bandwidth(double flow_bandwidth,
                                        double response_time,
                                        double filtering_window);

// Wire-filter demand of the victim's-gateway algorithm: at least
// R_max * T_tmp (everyone cooperates), at most N_agw (nobody does).
std::pair<double, double> filter_count_bounds(double max_request_rate,
                                              double temp_filter_timeout,
                                              double attacker_gateways);

// Shadow-table (DRAM) demand: R_max * T entries.
double shadow_entry_requirement(double max_request_rate,
                                double filtering_window);

}  // namespace aitf

#endif  // AITF_ANALYTICS_HPP
