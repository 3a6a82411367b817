#include "aitf/analytics.hpp"

#include <algorithm>

namespace aitf {

bool AttackProfile::valid() const {
  return victim_bandwidth >= 0 && attack_bandwidth >= 0 &&
         undesired_flows >= 0 && request_rate >= 0 && filtering_window >= 0 &&
         temp_filter_timeout >= 0 && response_time >= 0 &&
         attacker_gateways >= 0 && max_request_rate >= 0 &&
         requested_flows >= 0 && requested_flows <= undesired_flows;
}

bool AttackProfile::window_too_small() const {
  return filtering_window < 10.0 * temp_filter_timeout;
}

double lost_bandwidth_bound(const AttackProfile& p) {
  if (p.undesired_flows <= 0 || p.attack_bandwidth <= 0) return 0.0;
  const double blockable = p.request_rate * p.filtering_window;
  const double x = std::min(blockable, p.undesired_flows);
  const double bound = p.attack_bandwidth * (1.0 - x / p.undesired_flows);
  // Lost victim bandwidth cannot exceed the victim's own link.
  return std::clamp(bound, 0.0, p.victim_bandwidth);
}

double preserved_bandwidth(const AttackProfile& p) {
  return p.victim_bandwidth - lost_bandwidth_bound(p);
}

PerFlowLoss per_flow_consumed_bandwidth(double flow_bandwidth,
                                        double response_time,
                                        double filtering_window) {
  PerFlowLoss out;
  if (filtering_window <= 0) return out;
  out.exact =
      flow_bandwidth * response_time / (filtering_window + response_time);
  out.approximate = flow_bandwidth * response_time / filtering_window;
  if (out.approximate > 0)
    out.relative_gap = (out.approximate - out.exact) / out.approximate;
  return out;
}

std::pair<double, double> filter_count_bounds(double max_request_rate,
                                              double temp_filter_timeout,
                                              double attacker_gateways) {
  return {max_request_rate * temp_filter_timeout, attacker_gateways};
}

double shadow_entry_requirement(double max_request_rate,
                                double filtering_window) {
  return max_request_rate * filtering_window;
}

}  // namespace aitf
