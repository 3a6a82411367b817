#ifndef AITF_SCENARIO_HPP
#define AITF_SCENARIO_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include "aitf/protocol.hpp"
#include "aitf/topology.hpp"

namespace aitf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A complete experiment description, read from a flat sectioned key=value
// file. Sections: [topology], [victims], [attack], [protocol], [run].
// Unknown keys are rejected so typos cannot silently fall back to defaults.
struct ScenarioConfig {
  // [topology]
  std::uint32_t n_edge_domains = 0;  // required
  std::uint32_t n_core_domains = 8;
  std::uint32_t hosts_per_edge = 4;
  DeploymentMode deployment = DeploymentMode::EdgeOnly;
  double deployment_fraction = 1.0;
  LinkClasses link_classes;

  // [victims]
  std::uint32_t victim_count = 0;  // required
  double access_bps = 100e6;
  double baseline_goodput_bps = 50e6;
  std::uint32_t n_good_flows = 40;
  double good_colocated_fraction = 0.0;

  // [attack] (per victim)
  std::uint32_t n_attackers = 0;  // required
  double attack_total_bps = 0;    // required
  std::uint32_t n_gateways = 0;   // 0: one attacker per gateway where possible
  AttackerPolicy attacker_policy = AttackerPolicy::Compliant;
  GatewayPolicy gateway_policy = GatewayPolicy::Cooperative;
  double attack_start_s = 1.0;

  // [protocol]
  double request_rate = 1000.0;    // R, per victim
  double max_request_rate = 0.0;   // R_max; 0 derives R * victim_count
  double filtering_window = 120.0;  // T
  double temp_filter_timeout = 1.0;  // T_tmp
  double grace_period = 0.5;
  SanctionPolicy sanction = SanctionPolicy::Disconnect;
  AntiSpoofMode antispoof = AntiSpoofMode::Minimal;
  double false_id_prob = 0.0;
  std::size_t vgw_filter_capacity = 10000;
  double escalated_filter_ttl = kTtlForever;

  // [run]
  double duration_s = 0;  // required
  std::uint64_t seed = 1;
  double measurement_interval_s = 0.01;

  double resolved_max_request_rate() const {
    return max_request_rate > 0 ? max_request_rate
                                : request_rate * victim_count;
  }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(std::string_view text);

TopologyParams topology_params_from(const ScenarioConfig& cfg);
ProtocolConfig protocol_config_from(const ScenarioConfig& cfg);

}  // namespace aitf

#endif  // AITF_SCENARIO_HPP
