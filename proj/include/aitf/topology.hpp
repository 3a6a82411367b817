#ifndef AITF_TOPOLOGY_HPP
#define AITF_TOPOLOGY_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "aitf/core.hpp"

namespace aitf {

enum class NodeKind : std::uint8_t { Host, Router };
enum class DomainKind : std::uint8_t { Edge, Core };

// Which domains participate in the protocol. EdgeOnly models deployment at
// network edges (core routers stay legacy); Full puts every border router
// in the game, enabling deeper escalation rounds.
enum class DeploymentMode : std::uint8_t { EdgeOnly, Full };

struct TopoNode {
  NodeId id = kNoNode;
  NodeKind kind = NodeKind::Host;
  std::uint32_t domain = 0;
};

struct Domain {
  std::uint32_t id = 0;
  DomainKind kind = DomainKind::Edge;
  NodeId router = kNoNode;
  std::vector<NodeId> hosts;
  bool aitf = false;
};

struct SimLink {
  NodeId a = kNoNode;
  NodeId b = kNoNode;
  double capacity_bps = 0;
  double delay_s = 0;  // one-way propagation
};

struct LinkClasses {
  // Host access: Fast or Thin Ethernet, mixed by thin_fraction.
  double host_fast_bps = 100e6;
  double host_thin_bps = 10e6;
  double thin_fraction = 0.5;
  // Router trunks: OC192 or OC48, mixed by slow_fraction.
  double core_fast_bps = 10e9;
  double core_slow_bps = 2.488e9;
  double slow_fraction = 0.5;
};

struct TopologyParams {
  std::uint32_t n_edge_domains = 600;
  std::uint32_t n_core_domains = 8;
  std::uint32_t hosts_per_edge = 4;
  LinkClasses links;
  DeploymentMode deployment = DeploymentMode::EdgeOnly;
  double deployment_fraction = 1.0;  // of edge domains; victim's is forced in
  std::uint32_t victim_domain = 0;
  std::uint32_t victim_hosts = 1;    // leading hosts of the victim domain
  double victim_access_bps = 100e6;
  double host_delay_lo = 0.005;      // host-router one-way, mean 10 ms
  double host_delay_hi = 0.015;
  // Victim access links are pinned to the modelled average so measured
  // reaction times reflect the protocol, not the draw.
  double victim_host_delay = 0.010;
  double mean_router_path_delay = 0.100;  // one-way target between edges
  std::uint64_t seed = 1;
};

// Synthetic internet: edge domains (one border router plus hosts) hanging
// off a small core, with link classes and delay statistics matched to the
// modelled environment. Fully reproducible from the seed.
class Topology {
 public:
  const std::vector<TopoNode>& nodes() const { return nodes_; }
  const std::vector<Domain>& domains() const { return domains_; }
  const std::vector<SimLink>& links() const { return links_; }

  bool is_router(NodeId n) const {
    return nodes_[n].kind == NodeKind::Router;
  }
  std::uint32_t domain_of(NodeId n) const { return nodes_[n].domain; }
  NodeId router_of_domain(std::uint32_t d) const { return domains_[d].router; }
  NodeId gateway_of_host(NodeId host) const {
    return domains_[nodes_[host].domain].router;
  }
  bool runs_aitf(NodeId router) const {
    return domains_[nodes_[router].domain].aitf;
  }
  double host_link_delay(NodeId host) const;
  double host_link_capacity(NodeId host) const;

  // Border routers crossed from src to dst, source side first. Both
  // endpoints may be hosts or routers.
  std::vector<NodeId> border_path(NodeId src, NodeId dst) const;
  // Node-by-node path (hosts included) and the link index under each hop.
  std::vector<NodeId> route_nodes(NodeId src, NodeId dst) const;
  std::vector<std::uint32_t> route_links(NodeId src, NodeId dst) const;
  double one_way_delay(NodeId src, NodeId dst) const;
  std::uint32_t link_between(NodeId a, NodeId b) const;

  std::vector<NodeId> all_border_routers() const;

  double mean_host_gateway_rtt() const;
  double mean_edge_path_one_way_delay() const;
  std::uint64_t structure_digest() const;

 private:
  friend Topology generate_topology(const TopologyParams&);

  std::uint32_t router_index(NodeId router) const;

  std::vector<TopoNode> nodes_;
  std::vector<Domain> domains_;
  std::vector<SimLink> links_;
  std::unordered_map<std::uint64_t, std::uint32_t> link_index_;
  std::vector<NodeId> routers_;              // router NodeIds, dense order
  std::vector<std::uint32_t> router_rank_;   // NodeId -> dense router index
  std::vector<std::uint32_t> parent_;        // [src_rank * R + v_rank]
  std::vector<double> router_dist_;          // delay along chosen paths
};

// Throws std::invalid_argument on inconsistent parameters.
Topology generate_topology(const TopologyParams& params);

}  // namespace aitf

#endif  // AITF_TOPOLOGY_HPP
