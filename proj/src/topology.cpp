#include "aitf/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace aitf {

namespace {

std::uint64_t link_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

double Topology::host_link_delay(NodeId host) const {
  return links_[link_between(host, gateway_of_host(host))].delay_s;
}

double Topology::host_link_capacity(NodeId host) const {
  return links_[link_between(host, gateway_of_host(host))].capacity_bps;
}

std::uint32_t Topology::link_between(NodeId a, NodeId b) const {
  return link_index_.at(link_key(a, b));
}

std::uint32_t Topology::router_index(NodeId router) const {
  return router_rank_[router];
}

std::vector<NodeId> Topology::border_path(NodeId src, NodeId dst) const {
  const NodeId src_router = is_router(src) ? src : gateway_of_host(src);
  const NodeId dst_router = is_router(dst) ? dst : gateway_of_host(dst);
  const std::uint32_t s = router_index(src_router);
  std::vector<NodeId> path;
  // Walk predecessor pointers from the destination back to the source.
  NodeId v = dst_router;
  while (v != src_router) {
    path.push_back(v);
    v = routers_[parent_[static_cast<std::size_t>(s) * routers_.size() +
                         router_index(v)]];
  }
  path.push_back(src_router);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<NodeId> Topology::route_nodes(NodeId src, NodeId dst) const {
  std::vector<NodeId> nodes;
  if (!is_router(src)) nodes.push_back(src);
  for (NodeId r : border_path(src, dst)) nodes.push_back(r);
  if (!is_router(dst)) nodes.push_back(dst);
  return nodes;
}

std::vector<std::uint32_t> Topology::route_links(NodeId src, NodeId dst) const {
  const std::vector<NodeId> nodes = route_nodes(src, dst);
  std::vector<std::uint32_t> out;
  out.reserve(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    out.push_back(link_between(nodes[i], nodes[i + 1]));
  return out;
}

double Topology::one_way_delay(NodeId src, NodeId dst) const {
  double total = 0;
  for (std::uint32_t l : route_links(src, dst)) total += links_[l].delay_s;
  return total;
}

std::vector<NodeId> Topology::all_border_routers() const { return routers_; }

double Topology::mean_host_gateway_rtt() const {
  double sum = 0;
  std::size_t count = 0;
  for (const Domain& d : domains_)
    for (NodeId h : d.hosts) {
      sum += 2.0 * host_link_delay(h);
      ++count;
    }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double Topology::mean_edge_path_one_way_delay() const {
  double sum = 0;
  std::size_t count = 0;
  const std::size_t r = routers_.size();
  for (const Domain& a : domains_) {
    if (a.kind != DomainKind::Edge) continue;
    const std::uint32_t ia = router_rank_[a.router];
    for (const Domain& b : domains_) {
      if (b.kind != DomainKind::Edge || a.id == b.id) continue;
      sum += router_dist_[static_cast<std::size_t>(ia) * r +
                          router_rank_[b.router]];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::uint64_t Topology::structure_digest() const {
  // FNV-1a over the structural fields; enough to witness determinism.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  for (const TopoNode& n : nodes_) {
    mix(n.id);
    mix(static_cast<std::uint64_t>(n.kind));
    mix(n.domain);
  }
  for (const SimLink& l : links_) {
    mix(l.a);
    mix(l.b);
    mix(static_cast<std::uint64_t>(l.capacity_bps));
    mix(static_cast<std::uint64_t>(l.delay_s * 1e12));
  }
  for (const Domain& d : domains_) mix(d.aitf ? d.id * 2 + 1 : d.id * 2);
  return h;
}

Topology generate_topology(const TopologyParams& p) {
  if (p.n_edge_domains < 1)
    throw std::invalid_argument("topology: n_edge_domains must be >= 1");
  if (p.n_core_domains < 1)
    throw std::invalid_argument("topology: n_core_domains must be >= 1");
  if (p.hosts_per_edge < 1)
    throw std::invalid_argument("topology: hosts_per_edge must be >= 1");
  if (p.victim_domain >= p.n_edge_domains)
    throw std::invalid_argument("topology: victim_domain out of range");
  if (p.victim_hosts > p.hosts_per_edge)
    throw std::invalid_argument(
        "topology: victim_hosts exceeds hosts_per_edge");
  if (p.deployment_fraction < 0 || p.deployment_fraction > 1)
    throw std::invalid_argument(
        "topology: deployment_fraction must be in [0, 1]");

  Rng rng(p.seed);
  Rng rng_links = rng.fork(1);
  Rng rng_deploy = rng.fork(2);
  Rng rng_attach = rng.fork(3);

  Topology topo;
  const std::uint32_t n_domains = p.n_edge_domains + p.n_core_domains;
  topo.domains_.resize(n_domains);

  auto add_node = [&topo](NodeKind kind, std::uint32_t domain) {
    const NodeId id = static_cast<NodeId>(topo.nodes_.size());
    topo.nodes_.push_back(TopoNode{id, kind, domain});
    return id;
  };
  auto add_link = [&topo](NodeId a, NodeId b, double bps, double delay) {
    topo.link_index_[link_key(a, b)] =
        static_cast<std::uint32_t>(topo.links_.size());
    topo.links_.push_back(SimLink{a, b, bps, delay});
  };

  // Edge domains first (domain ids 0..n_edge-1), then core.
  for (std::uint32_t d = 0; d < p.n_edge_domains; ++d) {
    Domain& dom = topo.domains_[d];
    dom.id = d;
    dom.kind = DomainKind::Edge;
    dom.router = add_node(NodeKind::Router, d);
    for (std::uint32_t h = 0; h < p.hosts_per_edge; ++h) {
      const NodeId host = add_node(NodeKind::Host, d);
      dom.hosts.push_back(host);
      double bps = rng_links.next_unit() < p.links.thin_fraction
                       ? p.links.host_thin_bps
                       : p.links.host_fast_bps;
      double delay = rng_links.uniform(p.host_delay_lo, p.host_delay_hi);
      if (d == p.victim_domain && h < p.victim_hosts) {
        bps = p.victim_access_bps;
        delay = p.victim_host_delay;
      }
      add_link(host, dom.router, bps, delay);
    }
  }
  for (std::uint32_t c = 0; c < p.n_core_domains; ++c) {
    const std::uint32_t d = p.n_edge_domains + c;
    Domain& dom = topo.domains_[d];
    dom.id = d;
    dom.kind = DomainKind::Core;
    dom.router = add_node(NodeKind::Router, d);
  }

  auto core_router = [&](std::uint32_t c) {
    return topo.domains_[p.n_edge_domains + c].router;
  };
  auto trunk_bps = [&] {
    return rng_links.next_unit() < p.links.slow_fraction
               ? p.links.core_slow_bps
               : p.links.core_fast_bps;
  };

  // Core mesh: ring plus cross chords, then one uplink per edge router.
  // Raw delays are relative; they get rescaled to the target mean below.
  if (p.n_core_domains > 1) {
    for (std::uint32_t c = 0; c < p.n_core_domains; ++c)
      add_link(core_router(c), core_router((c + 1) % p.n_core_domains),
               trunk_bps(), rng_links.uniform(0.5, 1.5));
    for (std::uint32_t c = 0; c < p.n_core_domains / 2; ++c) {
      const std::uint32_t other = c + p.n_core_domains / 2;
      if (other != (c + 1) % p.n_core_domains &&
          (c != (other + 1) % p.n_core_domains))
        add_link(core_router(c), core_router(other), trunk_bps(),
                 rng_links.uniform(0.5, 1.5));
    }
  }
  for (std::uint32_t d = 0; d < p.n_edge_domains; ++d)
    add_link(topo.domains_[d].router,
             core_router(static_cast<std::uint32_t>(
                 rng_attach.next_below(p.n_core_domains))),
             trunk_bps(), rng_links.uniform(0.5, 1.5));

  // Deployment map over edge domains; the victim's domain always deploys.
  std::vector<std::uint32_t> edge_order(p.n_edge_domains);
  std::iota(edge_order.begin(), edge_order.end(), 0);
  for (std::uint32_t i = p.n_edge_domains; i > 1; --i)
    std::swap(edge_order[i - 1],
              edge_order[rng_deploy.next_below(i)]);
  const auto deployed = static_cast<std::uint32_t>(
      std::ceil(p.deployment_fraction * p.n_edge_domains));
  for (std::uint32_t i = 0; i < deployed && i < p.n_edge_domains; ++i)
    topo.domains_[edge_order[i]].aitf = true;
  topo.domains_[p.victim_domain].aitf = true;
  if (p.deployment == DeploymentMode::Full)
    for (std::uint32_t c = 0; c < p.n_core_domains; ++c)
      topo.domains_[p.n_edge_domains + c].aitf = true;

  // Router-level shortest paths (Dijkstra on delay, deterministic
  // tie-break on node id), then rescale trunk delays so the mean edge-to-
  // edge one-way delay hits the target.
  topo.routers_.clear();
  topo.router_rank_.assign(topo.nodes_.size(), 0);
  for (const TopoNode& n : topo.nodes_)
    if (n.kind == NodeKind::Router) {
      topo.router_rank_[n.id] = static_cast<std::uint32_t>(
          topo.routers_.size());
      topo.routers_.push_back(n.id);
    }
  const std::size_t nr = topo.routers_.size();

  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj(nr);
  for (const SimLink& l : topo.links_) {
    if (topo.nodes_[l.a].kind != NodeKind::Router ||
        topo.nodes_[l.b].kind != NodeKind::Router)
      continue;
    const std::uint32_t ia = topo.router_rank_[l.a];
    const std::uint32_t ib = topo.router_rank_[l.b];
    adj[ia].emplace_back(ib, l.delay_s);
    adj[ib].emplace_back(ia, l.delay_s);
  }

  topo.parent_.assign(nr * nr, 0);
  topo.router_dist_.assign(nr * nr, 0);
  std::vector<double> dist(nr);
  std::vector<std::uint32_t> par(nr);
  for (std::size_t s = 0; s < nr; ++s) {
    std::fill(dist.begin(), dist.end(),
              std::numeric_limits<double>::infinity());
    std::fill(par.begin(), par.end(), static_cast<std::uint32_t>(s));
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[s] = 0;
    pq.emplace(0.0, static_cast<std::uint32_t>(s));
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (auto [v, w] : adj[u]) {
        const double nd = d + w;
        if (nd < dist[v] - 1e-15 ||
            (std::abs(nd - dist[v]) <= 1e-15 && u < par[v])) {
          dist[v] = nd;
          par[v] = u;
          pq.emplace(nd, v);
        }
      }
    }
    std::copy(par.begin(), par.end(), topo.parent_.begin() + s * nr);
    std::copy(dist.begin(), dist.end(), topo.router_dist_.begin() + s * nr);
  }

  if (p.n_edge_domains > 1) {
    double sum = 0;
    std::size_t count = 0;
    for (std::uint32_t a = 0; a < p.n_edge_domains; ++a)
      for (std::uint32_t b = 0; b < p.n_edge_domains; ++b) {
        if (a == b) continue;
        sum += topo.router_dist_[static_cast<std::size_t>(topo.router_rank_
                  [topo.domains_[a].router]) * nr +
                  topo.router_rank_[topo.domains_[b].router]];
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    if (mean > 0) {
      const double scale = p.mean_router_path_delay / mean;
      for (SimLink& l : topo.links_)
        if (topo.nodes_[l.a].kind == NodeKind::Router &&
            topo.nodes_[l.b].kind == NodeKind::Router)
          l.delay_s *= scale;
      for (double& d : topo.router_dist_) d *= scale;
    }
  }

  return topo;
}

}  // namespace aitf
