#pragma once

#include <map>
#include <span>
#include <vector>

#include "tfcc/trust.hpp"

namespace tfcc {

// A participant eligible for routing: excluded nodes simply do not appear.
struct RoutingNode {
  NodeId id = -1;
  double x = 0.0;
  double y = 0.0;
};

// Directed graph over the unblocked nodes. The edge (from -> to) means
// `from` may forward to `to`: the endpoints are within radio range and the
// receiver trusts the sender at or above the threshold.
class TrustedGraph {
 public:
  struct Edge {
    NodeId to = -1;
    double trust = 0.0;
  };

  void add_node(NodeId id);
  void add_edge(NodeId from, NodeId to, double trust);

  bool contains(NodeId id) const { return adjacency_.contains(id); }
  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const;
  const std::vector<Edge>& edges_from(NodeId id) const;
  bool has_edge(NodeId from, NodeId to) const;
  const std::map<NodeId, std::vector<Edge>>& adjacency() const { return adjacency_; }

 private:
  std::map<NodeId, std::vector<Edge>> adjacency_;
};

// Builds the trusted graph from positions and directed trust records.
// Records are looked up in the subject -> evaluator orientation: the edge
// (i -> j) requires the record where j evaluates i.
TrustedGraph build_trusted_graph(std::span<const RoutingNode> nodes,
                                 std::span<const TrustRecord> records, double radio_range,
                                 double trust_threshold);

// Like above but every in-range pair gets both directed edges with trust 1;
// used by the trust-blind baseline.
TrustedGraph build_range_graph(std::span<const RoutingNode> nodes, double radio_range);

struct RouteEntry {
  bool reachable = false;
  NodeId next_hop = -1;
  int hop_count = 0;
  double path_min_trust = 0.0;  // bottleneck trust along the chosen path
};

using RoutingTable = std::map<NodeId, RouteEntry>;

// Hop-count shortest paths from every node to the sink over the directed
// edges. Among equal-hop choices the next hop maximizing the path's
// bottleneck trust wins; remaining ties go to the lowest next-hop id, which
// makes the table fully deterministic.
RoutingTable compute_routes(const TrustedGraph& graph, NodeId sink);

}  // namespace tfcc
