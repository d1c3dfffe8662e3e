#include "tfcc/routing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tfcc {

void TrustedGraph::add_node(NodeId id) { adjacency_.try_emplace(id); }

void TrustedGraph::add_edge(NodeId from, NodeId to, double trust) {
  if (!adjacency_.contains(from) || !adjacency_.contains(to))
    throw std::invalid_argument("trusted graph: edge endpoints must be added first");
  adjacency_[from].push_back(Edge{to, trust});
}

std::size_t TrustedGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& [id, edges] : adjacency_) n += edges.size();
  return n;
}

const std::vector<TrustedGraph::Edge>& TrustedGraph::edges_from(NodeId id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end())
    throw std::invalid_argument("trusted graph: unknown node " + std::to_string(id));
  return it->second;
}

bool TrustedGraph::has_edge(NodeId from, NodeId to) const {
  auto it = adjacency_.find(from);
  if (it == adjacency_.end()) return false;
  for (const Edge& e : it->second)
    if (e.to == to) return true;
  return false;
}

namespace {

double distance(const RoutingNode& a, const RoutingNode& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

TrustedGraph build_trusted_graph(std::span<const RoutingNode> nodes,
                                 std::span<const TrustRecord> records, double radio_range,
                                 double trust_threshold) {
  if (!(radio_range > 0.0)) throw std::invalid_argument("trusted graph: radio range must be positive");
  TrustedGraph graph;
  for (const RoutingNode& n : nodes) graph.add_node(n.id);

  std::map<std::pair<NodeId, NodeId>, double> trust;
  for (const TrustRecord& r : records) trust[{r.evaluator, r.subject}] = r.trust;

  for (const RoutingNode& from : nodes) {
    for (const RoutingNode& to : nodes) {
      if (from.id == to.id || distance(from, to) > radio_range) continue;
      // The receiver must trust the sender for the edge to carry traffic.
      auto it = trust.find({to.id, from.id});
      if (it != trust.end() && it->second >= trust_threshold - kTrustEps)
        graph.add_edge(from.id, to.id, it->second);
    }
  }
  return graph;
}

TrustedGraph build_range_graph(std::span<const RoutingNode> nodes, double radio_range) {
  if (!(radio_range > 0.0)) throw std::invalid_argument("range graph: radio range must be positive");
  TrustedGraph graph;
  for (const RoutingNode& n : nodes) graph.add_node(n.id);
  for (const RoutingNode& from : nodes)
    for (const RoutingNode& to : nodes)
      if (from.id != to.id && distance(from, to) <= radio_range)
        graph.add_edge(from.id, to.id, 1.0);
  return graph;
}

RoutingTable compute_routes(const TrustedGraph& graph, NodeId sink) {
  if (!graph.contains(sink)) throw std::invalid_argument("routes: sink is not in the graph");

  std::map<NodeId, int> dist;
  std::map<NodeId, double> bottleneck;
  RoutingTable table;
  for (const auto& [id, edges] : graph.adjacency()) {
    RouteEntry entry;
    entry.reachable = false;
    entry.next_hop = -1;
    entry.hop_count = -1;
    entry.path_min_trust = 0.0;
    table[id] = entry;
  }

  dist[sink] = 0;
  bottleneck[sink] = std::numeric_limits<double>::infinity();
  table[sink] = RouteEntry{true, -1, 0, 1.0};

  // Level-by-level relaxation: deterministic because nodes iterate in id
  // order and ties prefer the lowest next-hop id.
  const std::size_t node_count = graph.node_count();
  for (std::size_t level = 1; level <= node_count; ++level) {
    bool changed = false;
    for (const auto& [id, edges] : graph.adjacency()) {
      if (dist.contains(id)) continue;
      NodeId best_hop = -1;
      double best_bottleneck = -1.0;
      for (const TrustedGraph::Edge& e : edges) {
        auto it = dist.find(e.to);
        if (it == dist.end() || it->second != static_cast<int>(level) - 1) continue;
        const double candidate = std::min(e.trust, bottleneck[e.to]);
        if (candidate > best_bottleneck ||
            (candidate == best_bottleneck && best_hop != -1 && e.to < best_hop)) {
          best_bottleneck = candidate;
          best_hop = e.to;
        }
      }
      if (best_hop != -1) {
        dist[id] = static_cast<int>(level);
        bottleneck[id] = best_bottleneck;
        table[id] = RouteEntry{true, best_hop, static_cast<int>(level), best_bottleneck};
        changed = true;
      }
    }
    if (!changed) break;
  }
  return table;
}

}  // namespace tfcc
