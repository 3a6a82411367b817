#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "aitf/scenario.hpp"

using namespace aitf;

#ifndef AITF_SCENARIO_DIR
#define AITF_SCENARIO_DIR "scenarios"
#endif

namespace {

const char* kMinimal = R"(
[topology]
edge_domains = 10
[victims]
count = 1
[attack]
attackers = 5
total_bps = 5e6
[run]
duration_s = 2
)";

}  // namespace

TEST_CASE("bundled scenario files parse") {
  const ScenarioConfig s1 =
      parse_scenario(std::string(AITF_SCENARIO_DIR) + "/scenario1.cfg");
  CHECK(s1.victim_count == 2);
  CHECK(s1.n_attackers == 100);
  CHECK(s1.n_gateways == 100);
  CHECK(s1.gateway_policy == GatewayPolicy::Cooperative);
  CHECK(s1.request_rate == doctest::Approx(1000));
  CHECK(s1.temp_filter_timeout == doctest::Approx(1.0));
  CHECK(s1.filtering_window == doctest::Approx(120.0));

  const ScenarioConfig s2 =
      parse_scenario(std::string(AITF_SCENARIO_DIR) + "/scenario2.cfg");
  CHECK(s2.gateway_policy == GatewayPolicy::CompromisedOnOff);
  CHECK(s2.good_colocated_fraction == doctest::Approx(0.05));

  const ScenarioConfig s4 =
      parse_scenario(std::string(AITF_SCENARIO_DIR) + "/scenario4.cfg");
  CHECK(s4.n_attackers == 10000);
  // The defining relation of the heavy scenario: N_att = 2.5 R T.
  CHECK(s4.n_attackers == doctest::Approx(2.5 * s4.request_rate *
                                          s4.filtering_window));

  const ScenarioConfig wide =
      parse_scenario(std::string(AITF_SCENARIO_DIR) + "/wide.cfg");
  CHECK(wide.antispoof == AntiSpoofMode::Wide);
  CHECK(wide.deployment == DeploymentMode::Full);
}

TEST_CASE("defaults fill everything the file leaves out") {
  const ScenarioConfig c = parse_scenario_text(kMinimal);
  CHECK(c.temp_filter_timeout == doctest::Approx(1.0));
  CHECK(c.filtering_window == doctest::Approx(120.0));
  CHECK(c.request_rate == doctest::Approx(1000.0));
  CHECK(c.grace_period == doctest::Approx(0.5));
  CHECK(c.vgw_filter_capacity == 10000);
  CHECK(c.measurement_interval_s == doctest::Approx(0.01));
  CHECK(c.seed == 1);
  CHECK(c.sanction == SanctionPolicy::Disconnect);
  CHECK(c.antispoof == AntiSpoofMode::Minimal);
  CHECK(c.resolved_max_request_rate() == doctest::Approx(1000.0));
}

TEST_CASE("window ordering is enforced") {
  std::string bad(kMinimal);
  bad += "[protocol]\ntemp_filter_timeout_s = 300\nfiltering_window_s = 120\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad),
                       doctest::Contains("T_tmp < T"), ConfigError);
}

TEST_CASE("an empty file is rejected for its missing attack section") {
  CHECK_THROWS_WITH_AS(parse_scenario_text(""),
                       doctest::Contains("[attack]"), ConfigError);
}

TEST_CASE("unknown keys and sections are named in the error") {
  std::string bad(kMinimal);
  bad += "[protocol]\nfilter_capcity = 10\n";  // typo must not pass silently
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad),
                       doctest::Contains("filter_capcity"), ConfigError);

  std::string bad2(kMinimal);
  bad2 += "[protocol2]\nx = 1\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad2),
                       doctest::Contains("protocol2"), ConfigError);

  CHECK_THROWS_WITH_AS(parse_scenario_text("x = 1\n"),
                       doctest::Contains("outside any section"), ConfigError);
}

TEST_CASE("malformed values name the field and constraint") {
  std::string bad(kMinimal);
  bad += "[protocol]\nrequest_rate = fast\n";
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad),
                       doctest::Contains("request_rate"), ConfigError);

  std::string bad2(kMinimal);
  bad2 += "[attack]\nattackers = -3\n";
  CHECK_THROWS_AS(parse_scenario_text(bad2), ConfigError);

  std::string bad3(kMinimal);
  bad3 += "[victims]\ncount = 99\n";  // exceeds hosts_per_edge
  CHECK_THROWS_WITH_AS(parse_scenario_text(bad3),
                       doctest::Contains("hosts_per_edge"), ConfigError);
}

TEST_CASE("comments and spacing are tolerated") {
  const char* text = R"(
# experiment record
[topology]
  edge_domains = 10   # ten stub networks
[victims]
count=1
[attack]
attackers = 5 ; five sources
total_bps = 5e6
[run]
duration_s = 2
)";
  const ScenarioConfig c = parse_scenario_text(text);
  CHECK(c.n_edge_domains == 10);
  CHECK(c.n_attackers == 5);
}

TEST_CASE("derived configs carry the protocol parameters through") {
  ScenarioConfig c = parse_scenario_text(kMinimal);
  c.max_request_rate = 0;
  c.victim_count = 2;
  const ProtocolConfig p = protocol_config_from(c);
  CHECK(p.contract_rate == doctest::Approx(1000));
  CHECK(p.max_request_rate == doctest::Approx(2000));
  const TopologyParams tp = topology_params_from(c);
  CHECK(tp.victim_hosts == 2);
  CHECK(tp.n_edge_domains == 10);
}
