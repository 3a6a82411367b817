#include "aitf/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace aitf {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_number(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size())
      throw ConfigError("[" + section + "] " + key +
                        ": trailing characters in '" + value + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" +
                      value + "'");
  }
}

std::uint64_t parse_count(const std::string& section, const std::string& key,
                          const std::string& value) {
  const double v = parse_number(section, key, value);
  if (v < 0 || v != std::floor(v))
    throw ConfigError("[" + section + "] " + key +
                      ": must be a nonnegative integer, got '" + value + "'");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };

  if (n_attackers == 0 && attack_total_bps <= 0)
    fail("missing [attack] section (attackers and total_bps are required)");

  if (n_edge_domains == 0) fail("missing or zero [topology] edge_domains");
  if (n_core_domains == 0) fail("[topology] core_domains must be >= 1");
  if (hosts_per_edge == 0) fail("[topology] hosts_per_edge must be >= 1");
  if (deployment_fraction <= 0 || deployment_fraction > 1)
    fail("[topology] deployment_fraction must be in (0, 1]");

  if (victim_count == 0) fail("missing or zero [victims] count");
  if (victim_count > hosts_per_edge)
    fail("[victims] count exceeds [topology] hosts_per_edge");
  if (access_bps <= 0) fail("[victims] access_bps must be > 0");
  if (baseline_goodput_bps < 0) fail("[victims] baseline_bps must be >= 0");
  if (baseline_goodput_bps > 0 && n_good_flows == 0)
    fail("[victims] good_flows must be >= 1 when baseline_bps > 0");
  if (good_colocated_fraction < 0 || good_colocated_fraction > 1)
    fail("[victims] colocated_good_fraction must be in [0, 1]");

  if (n_attackers == 0) fail("missing or zero [attack] attackers");
  if (attack_total_bps <= 0) fail("missing or zero [attack] total_bps");
  if (n_gateways > n_edge_domains - 1)
    fail("[attack] gateways exceeds available non-victim edge domains");
  if (attack_start_s < 0) fail("[attack] start_s must be >= 0");

  if (request_rate <= 0) fail("[protocol] request_rate must be > 0");
  if (filtering_window <= 0) fail("[protocol] filtering_window_s must be > 0");
  if (temp_filter_timeout <= 0)
    fail("[protocol] temp_filter_timeout_s must be > 0");
  if (!(temp_filter_timeout < filtering_window))
    fail("[protocol] requires T_tmp < T (temp_filter_timeout_s < "
         "filtering_window_s)");
  if (grace_period <= 0) fail("[protocol] grace_period_s must be > 0");
  if (false_id_prob < 0 || false_id_prob >= 1)
    fail("[protocol] false_id_prob must be in [0, 1)");
  if (vgw_filter_capacity == 0)
    fail("[protocol] filter_capacity must be >= 1");
  if (escalated_filter_ttl <= 0)
    fail("[protocol] escalated_filter_ttl_s must be > 0 or 'forever'");

  if (duration_s <= 0) fail("missing or zero [run] duration_s");
  if (measurement_interval_s <= 0)
    fail("[run] measurement_interval_s must be > 0");
}

ScenarioConfig parse_scenario_text(std::string_view text) {
  ScenarioConfig cfg;
  std::string section;

  using Setter = std::function<void(ScenarioConfig&, const std::string&,
                                    const std::string&, const std::string&)>;
  // section -> key -> setter
  static const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"topology",
       {
           {"edge_domains",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.n_edge_domains =
                  static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"core_domains",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.n_core_domains =
                  static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"hosts_per_edge",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.hosts_per_edge =
                  static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"deployment",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "edge") c.deployment = DeploymentMode::EdgeOnly;
              else if (v == "full") c.deployment = DeploymentMode::Full;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected edge|full, got '" + v + "'");
            }},
           {"deployment_fraction",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.deployment_fraction = parse_number(s, k, v);
            }},
           {"host_links",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "fast") c.link_classes.thin_fraction = 0.0;
              else if (v == "thin") c.link_classes.thin_fraction = 1.0;
              else if (v == "mixed") c.link_classes.thin_fraction = 0.5;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected fast|thin|mixed, got '" + v +
                                  "'");
            }},
           {"core_links",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "oc192") c.link_classes.slow_fraction = 0.0;
              else if (v == "oc48") c.link_classes.slow_fraction = 1.0;
              else if (v == "mixed") c.link_classes.slow_fraction = 0.5;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected oc192|oc48|mixed, got '" + v +
                                  "'");
            }},
       }},
      {"victims",
       {
           {"count",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.victim_count = static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"access_bps",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) { c.access_bps = parse_number(s, k, v); }},
           {"baseline_bps",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.baseline_goodput_bps = parse_number(s, k, v);
            }},
           {"good_flows",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.n_good_flows = static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"colocated_good_fraction",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.good_colocated_fraction = parse_number(s, k, v);
            }},
       }},
      {"attack",
       {
           {"attackers",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.n_attackers = static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"total_bps",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.attack_total_bps = parse_number(s, k, v);
            }},
           {"gateways",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.n_gateways = static_cast<std::uint32_t>(parse_count(s, k, v));
            }},
           {"attacker_policy",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "compliant") c.attacker_policy = AttackerPolicy::Compliant;
              else if (v == "onoff") c.attacker_policy = AttackerPolicy::OnOff;
              else if (v == "deaf") c.attacker_policy = AttackerPolicy::Deaf;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected compliant|onoff|deaf, got '" +
                                  v + "'");
            }},
           {"gateway_policy",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "cooperative")
                c.gateway_policy = GatewayPolicy::Cooperative;
              else if (v == "onoff")
                c.gateway_policy = GatewayPolicy::CompromisedOnOff;
              else if (v == "unresponsive")
                c.gateway_policy = GatewayPolicy::Unresponsive;
              else
                throw ConfigError(
                    "[" + s + "] " + k +
                    ": expected cooperative|onoff|unresponsive, got '" + v +
                    "'");
            }},
           {"start_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.attack_start_s = parse_number(s, k, v);
            }},
       }},
      {"protocol",
       {
           {"request_rate",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.request_rate = parse_number(s, k, v);
            }},
           {"max_request_rate",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.max_request_rate = parse_number(s, k, v);
            }},
           {"filtering_window_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.filtering_window = parse_number(s, k, v);
            }},
           {"temp_filter_timeout_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.temp_filter_timeout = parse_number(s, k, v);
            }},
           {"grace_period_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.grace_period = parse_number(s, k, v);
            }},
           {"sanction",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "disconnect") c.sanction = SanctionPolicy::Disconnect;
              else if (v == "persistent")
                c.sanction = SanctionPolicy::PersistentFilter;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected disconnect|persistent, got '" +
                                  v + "'");
            }},
           {"antispoof",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "minimal") c.antispoof = AntiSpoofMode::Minimal;
              else if (v == "wide") c.antispoof = AntiSpoofMode::Wide;
              else
                throw ConfigError("[" + s + "] " + k +
                                  ": expected minimal|wide, got '" + v + "'");
            }},
           {"false_id_prob",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.false_id_prob = parse_number(s, k, v);
            }},
           {"filter_capacity",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.vgw_filter_capacity =
                  static_cast<std::size_t>(parse_count(s, k, v));
            }},
           {"escalated_filter_ttl_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              if (v == "forever") c.escalated_filter_ttl = kTtlForever;
              else c.escalated_filter_ttl = parse_number(s, k, v);
            }},
       }},
      {"run",
       {
           {"duration_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) { c.duration_s = parse_number(s, k, v); }},
           {"seed",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) { c.seed = parse_count(s, k, v); }},
           {"measurement_interval_s",
            [](ScenarioConfig& c, const std::string& s, const std::string& k,
               const std::string& v) {
              c.measurement_interval_s = parse_number(s, k, v);
            }},
       }},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    if (auto pos = line.find(';'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header '" + raw + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.contains(section))
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got '" + raw + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key +
                        "' outside any section");
    const auto& keys = schema.at(section);
    auto it = keys.find(key);
    if (it == keys.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" +
                        key + "' in [" + section + "]");
    it->second(cfg, section, key, value);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

TopologyParams topology_params_from(const ScenarioConfig& cfg) {
  TopologyParams p;
  p.n_edge_domains = cfg.n_edge_domains;
  p.n_core_domains = cfg.n_core_domains;
  p.hosts_per_edge = cfg.hosts_per_edge;
  p.links = cfg.link_classes;
  p.deployment = cfg.deployment;
  p.deployment_fraction = cfg.deployment_fraction;
  p.victim_domain = 0;
  p.victim_hosts = cfg.victim_count;
  p.victim_access_bps = cfg.access_bps;
  p.seed = cfg.seed;
  return p;
}

ProtocolConfig protocol_config_from(const ScenarioConfig& cfg) {
  ProtocolConfig p;
  p.filtering_window = cfg.filtering_window;
  p.temp_filter_timeout = cfg.temp_filter_timeout;
  p.grace_period = cfg.grace_period;
  p.escalated_filter_ttl = cfg.escalated_filter_ttl;
  p.sanction = cfg.sanction;
  p.antispoof = cfg.antispoof;
  p.wire_capacity = cfg.vgw_filter_capacity;
  p.contract_rate = cfg.request_rate;
  p.max_request_rate = cfg.resolved_max_request_rate();
  return p;
}

}  // namespace aitf
