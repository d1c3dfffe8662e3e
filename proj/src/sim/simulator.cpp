#include "tfcc/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "tfcc/congestion.hpp"
#include "tfcc/rate_control.hpp"
#include "tfcc/routing.hpp"
#include "tfcc/sim/rng.hpp"

namespace tfcc::sim {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Packet {
  long id = -1;
  NodeId origin = -1;
  double created_s = 0.0;
  bool junk = false;  // flooder clone: damages queues and energy, never counted
};

enum class FrameKind { kData, kAck, kProbe };

struct Frame {
  FrameKind kind = FrameKind::kData;
  NodeId from = -1;
  NodeId to = -1;
  Packet packet;
  long ref_id = -1;  // acks: id of the frame being acknowledged
};

enum class EventType { kArrival, kTxComplete, kControlTick, kHoldRelease, kDelayedCtrl, kWake };

struct Event {
  double time = 0.0;
  int klass = 0;  // control ticks sort after same-time events
  std::uint64_t seq = 0;
  EventType type = EventType::kArrival;
  NodeId node = -1;
  Frame frame;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.klass != b.klass) return a.klass > b.klass;
    return a.seq > b.seq;
  }
};

struct PendingTx {
  NodeId subject = -1;
  double started_s = 0.0;    // attributes the ack to the window of the send
  double completed_s = 0.0;  // round-trip reference: serialization excluded
};

struct Node {
  NodeId id = -1;
  double x = 0.0;
  double y = 0.0;
  NodeBehavior behavior = NodeBehavior::kBenevolent;
  double p_drop = 0.0;
  int dup_factor = 1;
  double extra_delay_s = 0.0;

  double battery = 0.0;
  bool blocked = false;
  double blocked_at_s = -1.0;

  RouteEntry route;
  NodeId prev_parent = -2;

  std::map<NodeId, std::deque<Packet>> queues;  // key: child id or kLocalSource
  std::deque<Frame> ctrl_fifo;
  std::deque<Packet> junk_fifo;
  bool tx_busy = false;
  double next_wake_s = kInf;

  std::map<NodeId, double> next_ok_s;      // per-queue service gate
  double up_next_ok_s = 0.0;               // aggregate gate toward the parent
  double send_gate_pps = 0.0;              // backpressure-adjusted upward rate
  double last_grant_pps = 0.0;             // previous interval's grant from the parent
  std::map<NodeId, double> service_rates;  // this interval's grants, by source
  std::map<NodeId, int> enqueue_attempts;  // offered load per queue since the last grant

  std::map<long, PendingTx> pending;  // outstanding transmissions awaiting ack

  std::int64_t tx_events = 0;
  std::int64_t rx_events = 0;
  double last_tx_s = -1.0;

  SplitMix64 traffic{0};
  SplitMix64 drop_coin{0};
};

}  // namespace

struct Simulator::Impl {
  ScenarioConfig config;
  std::uint64_t seed = 0;
  SimOptions options;

  std::shared_ptr<const FuzzyTables> tables;
  std::vector<Node> nodes;
  std::vector<std::vector<NodeId>> neighbours;
  std::vector<NodeId> known_ids;
  std::unique_ptr<TrustManager> trust;
  TrustedGraph graph;

  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  std::uint64_t next_seq = 0;
  long next_frame_id = 0;
  long tick_index = 0;

  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_overflow = 0;
  std::int64_t dropped_malicious = 0;
  std::int64_t dropped_noroute = 0;
  std::int64_t wire_accounted = 0;
  std::int64_t held_accounted = 0;
  double latency_sum_s = 0.0;
  double energy_units = 0.0;

  std::vector<MetricsRow> metrics;
  std::vector<QueuePressureSample> pressure;
  std::vector<TrustLogRow> trust_rows;
  std::vector<RouteLogRow> route_rows;
  std::vector<CongestionLogRow> congestion_rows;
  std::vector<RateLogRow> rate_rows;
  std::vector<std::string> warnings;
  bool finished = false;

  bool trust_enabled() const { return config.protocol != Protocol::kNoTrust; }
  bool rate_enabled() const { return config.protocol != Protocol::kNoRateControl; }

  double data_tx_s() const { return 1.0 / config.link_rate_pps; }
  double ctrl_tx_s() const {
    return (config.control_frame_units / config.packet_size_units) / config.link_rate_pps;
  }

  Impl(ScenarioConfig cfg, std::uint64_t seed_value, SimOptions opts)
      : config(std::move(cfg)), seed(seed_value), options(opts) {
    config.validate();
    tables = config.tables();
    place_nodes();
    assign_behaviors();
    build_neighbourhoods();
    if (trust_enabled()) {
      TrustManager::Options topt;
      topt.initial_trust = config.initial_trust;
      topt.trust_threshold = config.trust_threshold;
      topt.window_packets = config.window_packets;
      topt.window_seconds = config.window_seconds;
      trust = std::make_unique<TrustManager>(
          topt, tables, [this](NodeId n) -> std::pair<double, double> {
            return {nodes[static_cast<std::size_t>(n)].battery, config.battery_full};
          });
      for (NodeId v = 0; v < static_cast<NodeId>(nodes.size()); ++v)
        for (NodeId u : neighbours[static_cast<std::size_t>(v)]) trust->register_link(v, u, 0.0);
    }
    for (Node& node : nodes) {
      node.battery = config.battery_full;
      // Before the first grant a node is unthrottled, matching the default
      // service rate; the admission cap must not see a zero gate at t = 0.
      node.send_gate_pps = config.link_rate_pps;
      node.last_grant_pps = config.link_rate_pps;
      if (generates_traffic(node)) node.queues[kLocalSource];  // queue exists from the start
    }
    seed_streams();
    schedule_first_arrivals();
    push_event(0.0, 1, EventType::kControlTick, -1, {});
  }

  bool generates_traffic(const Node& node) const {
    return node.id != 0 && node.behavior == NodeBehavior::kBenevolent &&
           config.traffic_rate_pps > 0.0;
  }

  void place_nodes() {
    nodes.resize(static_cast<std::size_t>(config.node_count));
    if (!config.nodes.empty()) {
      for (const NodeSpec& spec : config.nodes) {
        Node& node = nodes[static_cast<std::size_t>(spec.id)];
        node.id = spec.id;
        node.x = spec.x;
        node.y = spec.y;
      }
      return;
    }
    SplitMix64 placement = derive_stream(seed, stream::kPlacement);
    nodes[0].id = 0;
    nodes[0].x = config.field_width_m / 2.0;
    nodes[0].y = config.field_height_m / 2.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      nodes[i].id = static_cast<NodeId>(i);
      nodes[i].x = placement.uniform(0.0, config.field_width_m);
      nodes[i].y = placement.uniform(0.0, config.field_height_m);
    }
  }

  void assign_behaviors() {
    for (Node& node : nodes) {
      node.p_drop = config.p_drop;
      node.dup_factor = config.dup_factor;
      node.extra_delay_s = config.extra_delay_s;
    }
    if (!config.nodes.empty()) {
      for (const NodeSpec& spec : config.nodes) {
        Node& node = nodes[static_cast<std::size_t>(spec.id)];
        node.behavior = spec.behavior;
        if (spec.p_drop) node.p_drop = *spec.p_drop;
        if (spec.dup_factor) node.dup_factor = *spec.dup_factor;
        if (spec.extra_delay_s) node.extra_delay_s = *spec.extra_delay_s;
      }
      return;
    }
    SplitMix64 behavior = derive_stream(seed, stream::kBehavior);
    const double mix_total =
        config.behavior_mix.dropper + config.behavior_mix.flooder + config.behavior_mix.delayer;
    auto draw_type = [&]() {
      const double u = behavior.next_double() * mix_total;
      if (u < config.behavior_mix.dropper) return NodeBehavior::kDropper;
      if (u < config.behavior_mix.dropper + config.behavior_mix.flooder) return NodeBehavior::kFlooder;
      return NodeBehavior::kDelayer;
    };
    if (config.exact_malicious_count) {
      std::vector<NodeId> ids;
      for (std::size_t i = 1; i < nodes.size(); ++i) ids.push_back(static_cast<NodeId>(i));
      for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[behavior.next_u64() % i]);
      const auto count = static_cast<std::size_t>(
          std::llround(config.malicious_fraction * static_cast<double>(ids.size())));
      for (std::size_t i = 0; i < count && i < ids.size(); ++i)
        nodes[static_cast<std::size_t>(ids[i])].behavior = draw_type();
    } else {
      for (std::size_t i = 1; i < nodes.size(); ++i)
        if (behavior.next_double() < config.malicious_fraction) nodes[i].behavior = draw_type();
    }
  }

  void build_neighbourhoods() {
    neighbours.assign(nodes.size(), {});
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      known_ids.push_back(static_cast<NodeId>(i));
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (i == j) continue;
        const double dx = nodes[i].x - nodes[j].x;
        const double dy = nodes[i].y - nodes[j].y;
        if (std::sqrt(dx * dx + dy * dy) <= config.radio_range_m)
          neighbours[i].push_back(static_cast<NodeId>(j));
      }
    }
    if (neighbours[0].empty())
      warnings.push_back("no node is within radio range of the sink; nothing can be delivered");
  }

  void seed_streams() {
    for (Node& node : nodes) {
      node.traffic = derive_stream(seed, stream::kTraffic, static_cast<std::uint64_t>(node.id));
      node.drop_coin = derive_stream(seed, stream::kDropCoin, static_cast<std::uint64_t>(node.id));
    }
  }

  void schedule_first_arrivals() {
    for (Node& node : nodes)
      if (generates_traffic(node))
        push_event(node.traffic.exponential(config.traffic_rate_pps), 0, EventType::kArrival,
                   node.id, {});
  }

  void push_event(double time, int klass, EventType type, NodeId node, Frame frame) {
    Event event;
    event.time = time;
    event.klass = klass;
    event.seq = next_seq++;
    event.type = type;
    event.node = node;
    event.frame = std::move(frame);
    events.push(std::move(event));
  }

  // ---- counters -----------------------------------------------------------

  std::int64_t dropped_total() const { return dropped_overflow + dropped_malicious + dropped_noroute; }
  std::int64_t in_flight() const { return generated - delivered - dropped_total(); }

  void charge_tx(Node& node) {
    node.battery = std::max(0.0, node.battery - config.e_tx);
    energy_units += config.e_tx;
    ++node.tx_events;
  }

  void charge_rx(Node& node) {
    node.battery = std::max(0.0, node.battery - config.e_rx);
    energy_units += config.e_rx;
    ++node.rx_events;
  }

  // ---- frame plumbing -----------------------------------------------------

  void push_ctrl(Node& node, Frame frame, double now) {
    if (node.blocked) return;
    node.ctrl_fifo.push_back(std::move(frame));
    try_send(node.id, now);
  }

  void send_ack(Node& from, NodeId to, long ref_id, double now) {
    Frame ack;
    ack.kind = FrameKind::kAck;
    ack.from = from.id;
    ack.to = to;
    ack.ref_id = ref_id;
    push_ctrl(from, std::move(ack), now);
  }

  void enqueue_data(Node& node, NodeId source, const Packet& packet, double now) {
    // Attempts count even when the queue overflows: they measure offered load.
    if (rate_enabled()) ++node.enqueue_attempts[source];
    auto& queue = node.queues[source];
    if (static_cast<int>(queue.size()) >= config.queue_capacity) {
      if (!packet.junk) ++dropped_overflow;
      return;
    }
    queue.push_back(packet);
    try_send(node.id, now);
  }

  double service_rate(const Node& node, NodeId source) const {
    auto it = node.service_rates.find(source);
    return it != node.service_rates.end() ? it->second : config.link_rate_pps;
  }

  void try_send(NodeId id, double now) {
    Node& node = nodes[static_cast<std::size_t>(id)];
    if (node.blocked || node.tx_busy || node.battery <= 0.0) return;

    if (!node.ctrl_fifo.empty()) {
      Frame frame = std::move(node.ctrl_fifo.front());
      node.ctrl_fifo.pop_front();
      start_tx(node, std::move(frame), now, ctrl_tx_s());
      return;
    }

    if (node.id == 0 || !node.route.reachable) return;

    if (!node.junk_fifo.empty()) {
      Frame frame;
      frame.kind = FrameKind::kData;
      frame.from = node.id;
      frame.to = node.route.next_hop;
      frame.packet = node.junk_fifo.front();
      node.junk_fifo.pop_front();
      start_tx(node, std::move(frame), now, data_tx_s());
      return;
    }

    // The upward gate is the admission contract with the parent and blocks
    // hard. The per-queue clocks only order service: the queue whose virtual
    // clock lags most goes first, so grants shape shares while the
    // transmitter never idles with data queued. A rate-limited drain would
    // let full queues hold the congestion index up, which holds the drain
    // down, a self-sustaining collapse.
    const bool gated = rate_enabled();
    NodeId best = -2;
    double best_clock = kInf;
    for (auto& [source, queue] : node.queues) {
      if (queue.empty()) continue;
      if (!gated) {
        best = source;
        break;
      }
      double clock = 0.0;
      if (auto it = node.next_ok_s.find(source); it != node.next_ok_s.end()) clock = it->second;
      if (clock < best_clock - kTimeEps) {
        best = source;
        best_clock = clock;
      }
    }
    if (best == -2) return;

    if (gated && node.up_next_ok_s > now + kTimeEps) {
      if (node.up_next_ok_s < node.next_wake_s - kTimeEps) {
        node.next_wake_s = node.up_next_ok_s;
        push_event(node.up_next_ok_s, 0, EventType::kWake, node.id, {});
      }
      return;
    }

    auto& queue = node.queues[best];
    Frame frame;
    frame.kind = FrameKind::kData;
    frame.from = node.id;
    frame.to = node.route.next_hop;
    frame.packet = queue.front();
    queue.pop_front();
    if (gated) {
      const double rate = std::max(service_rate(node, best), 1e-9);
      double& clock = node.next_ok_s[best];
      clock = std::max(now, clock) + 1.0 / rate;
      const double up = std::max(node.send_gate_pps, 1e-9);
      node.up_next_ok_s = std::max(now, node.up_next_ok_s) + 1.0 / up;
    }
    start_tx(node, std::move(frame), now, data_tx_s());
  }

  void start_tx(Node& node, Frame frame, double now, double tx_time) {
    node.tx_busy = true;
    node.last_tx_s = now;
    charge_tx(node);

    if (frame.kind == FrameKind::kData) {
      // Every forwarding step must follow a live edge of the current graph.
      if (frame.to != node.route.next_hop || !graph.has_edge(node.id, frame.to))
        throw std::logic_error("forwarding audit: transmission outside the routing graph");
      if (!frame.packet.junk) ++wire_accounted;
      if (node.behavior == NodeBehavior::kFlooder && !frame.packet.junk) {
        for (int copy = 1; copy < node.dup_factor; ++copy) {
          if (static_cast<int>(node.junk_fifo.size()) >= 3 * config.queue_capacity) break;
          Packet clone = frame.packet;
          clone.junk = true;
          node.junk_fifo.push_back(clone);
        }
      }
    }

    if (frame.kind != FrameKind::kAck && trust_enabled() &&
        node.behavior == NodeBehavior::kBenevolent) {
      trust->note_transmission(node.id, frame.to);
      node.pending[frame.packet.id] = PendingTx{frame.to, now, now + tx_time};
    }

    push_event(now + tx_time, 0, EventType::kTxComplete, node.id, std::move(frame));
  }

  void deliver(const Frame& frame, double now) {
    Node& sender = nodes[static_cast<std::size_t>(frame.from)];
    sender.tx_busy = false;

    Node& receiver = nodes[static_cast<std::size_t>(frame.to)];
    if (receiver.blocked) {
      // A blocked node's radio is off: whatever was in flight toward it dies.
      if (frame.kind == FrameKind::kData && !frame.packet.junk) {
        --wire_accounted;
        ++dropped_malicious;
      }
      try_send(frame.from, now);
      return;
    }

    charge_rx(receiver);
    switch (frame.kind) {
      case FrameKind::kData: receive_data(receiver, frame, now); break;
      case FrameKind::kAck: receive_ack(receiver, frame, now); break;
      case FrameKind::kProbe: respond(receiver, frame, now); break;
    }
    try_send(frame.from, now);
  }

  void receive_data(Node& receiver, const Frame& frame, double now) {
    const Packet& packet = frame.packet;
    if (!packet.junk) --wire_accounted;

    if (receiver.id == 0) {
      send_ack(receiver, frame.from, packet.id, now);
      if (!packet.junk) {
        ++delivered;
        latency_sum_s += now - packet.created_s;
      }
      return;
    }

    switch (receiver.behavior) {
      case NodeBehavior::kDropper:
        if (receiver.drop_coin.next_double() < receiver.p_drop) {
          if (!packet.junk) ++dropped_malicious;
          return;  // silently dropped, never acknowledged
        }
        send_ack(receiver, frame.from, packet.id, now);
        enqueue_data(receiver, frame.from, packet, now);
        return;
      case NodeBehavior::kFlooder:
        for (int copy = 0; copy < receiver.dup_factor; ++copy)
          send_ack(receiver, frame.from, packet.id, now);
        enqueue_data(receiver, frame.from, packet, now);
        return;
      case NodeBehavior::kDelayer: {
        Frame ack;
        ack.kind = FrameKind::kAck;
        ack.from = receiver.id;
        ack.to = frame.from;
        ack.ref_id = packet.id;
        push_event(now + receiver.extra_delay_s, 0, EventType::kDelayedCtrl, receiver.id,
                   std::move(ack));
        Frame held = frame;  // re-dispatched into the queue after the hold
        if (!packet.junk) ++held_accounted;
        push_event(now + receiver.extra_delay_s, 0, EventType::kHoldRelease, receiver.id,
                   std::move(held));
        return;
      }
      case NodeBehavior::kBenevolent:
        send_ack(receiver, frame.from, packet.id, now);
        enqueue_data(receiver, frame.from, packet, now);
        return;
    }
  }

  void receive_ack(Node& receiver, const Frame& frame, double now) {
    if (!trust_enabled() || receiver.behavior != NodeBehavior::kBenevolent) return;
    auto it = receiver.pending.find(frame.ref_id);
    if (it != receiver.pending.end() && it->second.subject == frame.from) {
      trust->note_ack(receiver.id, frame.from, now - it->second.completed_s,
                      it->second.started_s);
      receiver.pending.erase(it);
    } else {
      trust->note_unmatched_ack(receiver.id, frame.from);
    }
  }

  void respond(Node& receiver, const Frame& probe, double now) {
    switch (receiver.behavior) {
      case NodeBehavior::kDropper:
        if (receiver.drop_coin.next_double() < receiver.p_drop) return;
        send_ack(receiver, probe.from, probe.packet.id, now);
        return;
      case NodeBehavior::kFlooder:
        for (int copy = 0; copy < receiver.dup_factor; ++copy)
          send_ack(receiver, probe.from, probe.packet.id, now);
        return;
      case NodeBehavior::kDelayer: {
        Frame ack;
        ack.kind = FrameKind::kAck;
        ack.from = receiver.id;
        ack.to = probe.from;
        ack.ref_id = probe.packet.id;
        push_event(now + receiver.extra_delay_s, 0, EventType::kDelayedCtrl, receiver.id,
                   std::move(ack));
        return;
      }
      case NodeBehavior::kBenevolent:
        send_ack(receiver, probe.from, probe.packet.id, now);
        return;
    }
  }

  // ---- per-event handlers -------------------------------------------------

  void on_arrival(NodeId id, double now) {
    Node& node = nodes[static_cast<std::size_t>(id)];
    push_event(now + node.traffic.exponential(config.traffic_rate_pps), 0, EventType::kArrival, id,
               {});
    // Unreachable and blocked nodes generate no traffic; the arrival process
    // keeps ticking so recovery resumes on the exact same schedule.
    if (node.blocked || !node.route.reachable) return;
    Packet packet;
    packet.id = next_frame_id++;
    packet.origin = id;
    packet.created_s = now;
    ++generated;
    enqueue_data(node, kLocalSource, packet, now);
  }

  void on_hold_release(NodeId id, const Frame& frame, double now) {
    Node& node = nodes[static_cast<std::size_t>(id)];
    if (!frame.packet.junk) --held_accounted;
    if (node.blocked) {
      if (!frame.packet.junk) ++dropped_malicious;
      return;
    }
    enqueue_data(node, frame.from, frame.packet, now);
  }

  void on_delayed_ctrl(NodeId id, Frame frame, double now) {
    Node& node = nodes[static_cast<std::size_t>(id)];
    if (node.blocked) return;
    push_ctrl(node, std::move(frame), now);
  }

  // ---- the control loop ---------------------------------------------------

  void flush_queues(Node& node, std::int64_t& counter) {
    for (auto& [source, queue] : node.queues) {
      for (const Packet& packet : queue)
        if (!packet.junk) ++counter;
      queue.clear();
    }
    node.queues.clear();
    node.junk_fifo.clear();
  }

  void block_node(Node& node, double now) {
    node.blocked = true;
    node.blocked_at_s = now;
    trust->freeze_node(node.id);
    flush_queues(node, dropped_malicious);
    node.ctrl_fifo.clear();
    node.pending.clear();
  }

  void run_blocking(double now) {
    if (!trust_enabled()) return;
    const LinkClassification classes = trust->classify(config.trust_threshold, now);

    std::vector<bool> has_evidence(nodes.size(), false);
    for (const TrustRecord& record : trust->active_records())
      if (record.evaluated) has_evidence[static_cast<std::size_t>(record.subject)] = true;

    for (Node& node : nodes) {
      if (node.id == 0 || node.blocked) continue;
      // Condemnation needs evidence. A node accused only by presumptions is
      // merely stranded (isolated, or orphaned when its last neighbour got
      // blocked); stranded nodes go unreachable instead of being blocked.
      if (!has_evidence[static_cast<std::size_t>(node.id)]) continue;
      if (find_malicious(node.id, classes.trusted, known_ids)) block_node(node, now);
    }
  }

  void rebuild_routes(double now) {
    std::vector<RoutingNode> participants;
    for (const Node& node : nodes)
      if (!node.blocked) participants.push_back(RoutingNode{node.id, node.x, node.y});

    if (trust_enabled()) {
      std::vector<TrustRecord> usable;
      for (const TrustRecord& record : trust->active_records())
        if (!trust->presumption_stale(record, now)) usable.push_back(record);
      graph = build_trusted_graph(participants, usable, config.radio_range_m,
                                  config.trust_threshold);
    } else {
      graph = build_range_graph(participants, config.radio_range_m);
    }

    const RoutingTable routes = compute_routes(graph, 0);
    for (Node& node : nodes) {
      if (node.blocked) continue;
      const NodeId old_parent = node.route.reachable ? node.route.next_hop : -2;
      node.route = routes.at(node.id);
      // Only hop-count improvements are worth abandoning a parent: a parent
      // switch cold-starts the demand estimates on both sides, so ties stay
      // with the incumbent.
      if (node.route.reachable && old_parent >= 0 && old_parent != node.route.next_hop &&
          graph.has_edge(node.id, old_parent)) {
        const RouteEntry& via = routes.at(old_parent);
        if (via.reachable && via.hop_count + 1 == node.route.hop_count)
          node.route.next_hop = old_parent;
      }
      if (!node.route.reachable) {
        flush_queues(node, dropped_noroute);
        if (generates_traffic(node)) node.queues[kLocalSource];
        node.prev_parent = -2;
      }
    }
  }

  MembershipVector benevolent_fallback() const {
    std::vector<double> degrees(tables->trust.size(), 0.0);
    degrees.back() = 1.0;  // fully trusted: damping then depends on congestion alone
    return MembershipVector{&tables->trust, std::move(degrees)};
  }

  std::map<NodeId, double> compute_damping(double now) {
    std::map<NodeId, double> damping;
    if (!rate_enabled()) return damping;
    for (Node& node : nodes) {
      if (node.blocked || node.id == 0) continue;
      // Only transit queues feed the congestion signal. The local queue backs
      // up whenever the application offers more than the network carries;
      // damping children for that starves the node's own uplink grant and
      // locks it into a full-queue, high-damping loop it can never leave.
      std::vector<double> per_queue;
      for (auto& [source, queue] : node.queues) {
        if (source == kLocalSource) continue;
        QueueState state;
        state.occupancy = static_cast<int>(queue.size());
        state.capacity = config.queue_capacity;
        state.threshold_min = config.queue_threshold_min();
        state.threshold_max = config.queue_threshold_max();
        per_queue.push_back(queue_congestion(state, config.epsilon));
      }
      const double index = per_queue.empty() ? 0.0 : aggregate_congestion(per_queue).index;

      MembershipVector membership = benevolent_fallback();
      if (trust_enabled() && node.route.reachable) {
        // The damping blends the node's congestion with the trust its parent
        // places in it, so misbehaving senders get squeezed harder.
        membership = fuzzify(tables->trust, trust->trust(node.route.next_hop, node.id));
      }
      double value = 0.0;
      try {
        value = congestion_damping(index, membership, *tables);
      } catch (const NotBenevolentError&) {
        value = congestion_damping(index, benevolent_fallback(), *tables);
      }
      damping[node.id] = value;
      if (options.detail) congestion_rows.push_back({now, node.id, index, value});
    }
    return damping;
  }

  void run_rate_control(double now) {
    if (!rate_enabled()) return;
    const std::map<NodeId, double> damping = compute_damping(now);

    std::map<NodeId, std::vector<NodeId>> children;
    for (const Node& node : nodes)
      if (!node.blocked && node.id != 0 && node.route.reachable)
        children[node.route.next_hop].push_back(node.id);

    for (Node& parent : nodes) {
      if (parent.blocked) continue;
      parent.service_rates.clear();

      // Grant targets: the routing children plus any still-draining queue.
      std::map<NodeId, double> weights;
      if (auto it = children.find(parent.id); it != children.end())
        for (NodeId child : it->second) weights[child] = child_weight(parent, child);
      for (const auto& [source, queue] : parent.queues)
        if (source != kLocalSource && !queue.empty() && !weights.contains(source))
          weights[source] = child_weight(parent, source);

      if (parent.id == 0) {
        // The sink consumes instantly; it never throttles its children.
        for (const auto& [child, weight] : weights) {
          parent.service_rates[child] = config.link_rate_pps;
          if (options.detail) rate_rows.push_back({now, parent.id, child, config.link_rate_pps});
        }
        continue;
      }

      std::vector<std::pair<NodeId, double>> child_trust(weights.begin(), weights.end());
      const PriorityAssignment priorities = assign_priorities(parent.id, child_trust);
      const RateAllocation allocation =
          allocate_rates(priorities, config.link_rate_pps, damping.at(parent.id));
      // Queued data leaves this node only through its own upward gate, so
      // admitting more than that drains just turns into mid-tree overflow.
      // Capping total admission at the gate makes backpressure recursive:
      // each level's grants follow the path bottleneck one interval behind.
      // The first interval has no observations, so there is nothing to prove
      // a queue idle; demand capping starts once one interval has elapsed.
      if (tick_index == 0) {
        for (const RateGrant& grant : allocation.grants)
          parent.service_rates[grant.source] = grant.rate;
      } else {
        const double drain_cap = std::max(parent.send_gate_pps, 1.0);
        parent.service_rates =
            redistribute_unused(parent, weights, allocation,
                                std::min(allocation.effective_capacity, drain_cap));
      }
      if (options.detail)
        for (const auto& [source, rate] : parent.service_rates)
          rate_rows.push_back({now, parent.id, source, rate});
    }

    // Backpressure: each node's upward rate follows the occupancy of its own
    // queue at the parent, never exceeding the parent's grant.
    for (Node& node : nodes) {
      if (node.blocked || node.id == 0 || !node.route.reachable) continue;
      Node& parent = nodes[static_cast<std::size_t>(node.route.next_hop)];
      const double grant = service_rate(parent, node.id);
      const bool grant_rose = grant > node.last_grant_pps + 1e-9;
      node.last_grant_pps = grant;
      if (node.prev_parent != node.route.next_hop) {
        node.send_gate_pps = grant;
        node.prev_parent = node.route.next_hop;
        continue;
      }
      QueueState state;
      auto it = parent.queues.find(node.id);
      state.occupancy = it != parent.queues.end() ? static_cast<int>(it->second.size()) : 0;
      state.capacity = config.queue_capacity;
      state.threshold_min = config.queue_threshold_min();
      state.threshold_max = config.queue_threshold_max();
      // A raised grant is a fresh contract: reallocated capacity takes effect
      // this interval instead of crawling up at one packet per second. The
      // rebase stays out of the halving regime so overflow still bites.
      if (grant_rose && state.occupancy <= state.threshold_max) node.send_gate_pps = grant;
      node.send_gate_pps = adjust_on_queue(node.send_gate_pps, state, grant);
    }
    for (Node& node : nodes) node.enqueue_attempts.clear();
  }

  // Work-conserving refinement on top of the proportional shares: a share a
  // queue demonstrably cannot use this interval is re-offered, by weight, to
  // queues whose observed demand exceeds theirs. Demand is parent-observable:
  // enqueue attempts over the last interval plus the backlog already queued,
  // with headroom so a growing flow is never frozen at its current rate.
  // Every grant stays within min(share, demand)..demand and the total stays
  // within the admission cap, scaling floors down together if it must.
  std::map<NodeId, double> redistribute_unused(const Node& parent,
                                               const std::map<NodeId, double>& weights,
                                               const RateAllocation& allocation,
                                               double cap) const {
    const auto weight_of = [&](NodeId source) {
      return source == kLocalSource ? 1.0 : std::min(weights.at(source), 0.99);
    };
    std::map<NodeId, double> grants;
    std::map<NodeId, double> demand;
    double floor_sum = 0.0;
    for (const RateGrant& grant : allocation.grants) {
      double offered = 0.0;
      if (auto it = parent.enqueue_attempts.find(grant.source); it != parent.enqueue_attempts.end())
        offered += static_cast<double>(it->second);
      if (auto it = parent.queues.find(grant.source); it != parent.queues.end())
        offered += static_cast<double>(it->second.size());
      const double rate = offered / config.control_interval_s;
      demand[grant.source] = rate + std::max(4.0, rate);
      grants[grant.source] = std::min(grant.rate, demand[grant.source]);
      floor_sum += grants[grant.source];
    }
    if (floor_sum > cap) {
      const double scale = cap / floor_sum;
      for (auto& [source, rate] : grants) rate *= scale;
      return grants;
    }
    double pool = cap - floor_sum;
    for (int pass = 0; pass < 6 && pool > 1e-9; ++pass) {
      double needy_weight = 0.0;
      for (const auto& [source, rate] : grants)
        if (rate + 1e-12 < demand[source]) needy_weight += weight_of(source);
      if (needy_weight <= 0.0) break;
      double handed = 0.0;
      for (auto& [source, rate] : grants) {
        if (rate + 1e-12 >= demand[source]) continue;
        const double add = std::min(pool * weight_of(source) / needy_weight, demand[source] - rate);
        rate += add;
        handed += add;
      }
      pool -= handed;
      if (handed <= 1e-12) break;
    }
    return grants;
  }

  double child_weight(const Node& parent, NodeId child) const {
    if (!trust_enabled()) return 0.9;
    return std::clamp(trust->trust(parent.id, child), 0.0, 1.0);
  }

  void send_probes(double now) {
    if (!trust_enabled()) return;
    for (Node& node : nodes) {
      if (node.blocked || node.behavior != NodeBehavior::kBenevolent) continue;
      for (NodeId peer : neighbours[static_cast<std::size_t>(node.id)]) {
        if (nodes[static_cast<std::size_t>(peer)].blocked) continue;
        Frame probe;
        probe.kind = FrameKind::kProbe;
        probe.from = node.id;
        probe.to = peer;
        probe.packet.id = next_frame_id++;
        probe.packet.origin = node.id;
        probe.packet.created_s = now;
        push_ctrl(node, std::move(probe), now);
      }
    }
  }

  void purge_pending(double now) {
    for (Node& node : nodes) {
      for (auto it = node.pending.begin(); it != node.pending.end();) {
        if (now - it->second.started_s > config.window_seconds)
          it = node.pending.erase(it);
        else
          ++it;
      }
    }
  }

  void collect_detail(double now) {
    if (!options.detail) return;
    if (trust_enabled()) {
      for (const TrustRecord& record : trust->active_records()) {
        const bool usable = record.trust >= config.trust_threshold - kTrustEps &&
                            !trust->presumption_stale(record, now);
        trust_rows.push_back({now, record.evaluator, record.subject, record.trust, usable});
      }
    }
    for (const Node& node : nodes) {
      if (node.blocked) continue;
      route_rows.push_back(
          {now, node.id, node.route.next_hop, node.route.hop_count, node.route.reachable});
    }
  }

  void sample_pressure(double now) {
    // Pressure tracks transit queues for the same reason damping does: the
    // local queue measures offered load, not how well the network copes.
    for (const Node& node : nodes) {
      if (node.blocked) continue;
      QueuePressureSample sample;
      sample.time_s = now;
      sample.node = node.id;
      for (const auto& [source, queue] : node.queues) {
        if (source == kLocalSource) continue;
        ++sample.queues;
        if (static_cast<int>(queue.size()) > config.queue_threshold_max()) ++sample.above_max;
      }
      pressure.push_back(sample);
    }
  }

  void sample_metrics(double now) {
    std::int64_t queued = 0;
    for (const Node& node : nodes)
      for (const auto& [source, queue] : node.queues)
        for (const Packet& packet : queue)
          if (!packet.junk) ++queued;
    const std::int64_t live = queued + wire_accounted + held_accounted;
    if (live != in_flight()) {
      std::ostringstream out;
      out << "packet conservation violated at t=" << now << ": " << live << " live vs "
          << in_flight() << " by counters";
      throw std::logic_error(out.str());
    }

    MetricsRow row;
    row.time_s = now;
    row.generated = generated;
    row.delivered = delivered;
    row.dropped_overflow = dropped_overflow;
    row.dropped_malicious = dropped_malicious;
    row.dropped_noroute = dropped_noroute;
    row.in_flight = in_flight();
    row.mean_latency_s = delivered > 0 ? latency_sum_s / static_cast<double>(delivered) : 0.0;
    row.energy_units = energy_units;
    row.normalized_throughput =
        generated > 0 ? static_cast<double>(delivered) / static_cast<double>(generated) : 0.0;
    metrics.push_back(row);
  }

  void on_control_tick(double now) {
    if (trust_enabled()) trust->roll_windows(now);
    purge_pending(now);
    run_blocking(now);
    rebuild_routes(now);
    run_rate_control(now);
    send_probes(now);
    collect_detail(now);
    sample_pressure(now);
    sample_metrics(now);

    ++tick_index;
    const double next = static_cast<double>(tick_index) * config.control_interval_s;
    if (next <= config.duration_s + kTimeEps)
      push_event(next, 1, EventType::kControlTick, -1, {});

    for (const Node& node : nodes)
      if (!node.blocked) try_send(node.id, now);
  }

  void run() {
    if (finished) return;
    while (!events.empty()) {
      Event event = events.top();
      events.pop();
      if (event.time > config.duration_s + kTimeEps) break;
      switch (event.type) {
        case EventType::kArrival: on_arrival(event.node, event.time); break;
        case EventType::kTxComplete: deliver(event.frame, event.time); break;
        case EventType::kControlTick: on_control_tick(event.time); break;
        case EventType::kHoldRelease: on_hold_release(event.node, event.frame, event.time); break;
        case EventType::kDelayedCtrl: on_delayed_ctrl(event.node, event.frame, event.time); break;
        case EventType::kWake: {
          Node& node = nodes[static_cast<std::size_t>(event.node)];
          node.next_wake_s = kInf;
          try_send(node.id, event.time);
          break;
        }
      }
      if (event.type == EventType::kControlTick &&
          event.time >= config.duration_s - kTimeEps)
        break;
    }
    finished = true;
  }
};

Simulator::Simulator(ScenarioConfig config, std::uint64_t seed, SimOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), seed, options)) {}

Simulator::~Simulator() = default;

void Simulator::run() { impl_->run(); }

const std::vector<MetricsRow>& Simulator::rows() const { return impl_->metrics; }

std::vector<NodeSummary> Simulator::node_summaries() const {
  std::vector<NodeSummary> out;
  for (const Node& node : impl_->nodes) {
    NodeSummary summary;
    summary.id = node.id;
    summary.x = node.x;
    summary.y = node.y;
    summary.behavior = node.behavior;
    summary.blocked = node.blocked;
    summary.blocked_at_s = node.blocked_at_s;
    summary.reachable = node.route.reachable;
    summary.battery = node.battery;
    summary.tx_events = node.tx_events;
    summary.rx_events = node.rx_events;
    summary.last_tx_s = node.last_tx_s;
    out.push_back(summary);
  }
  return out;
}

const std::vector<QueuePressureSample>& Simulator::queue_pressure() const { return impl_->pressure; }
const std::vector<TrustLogRow>& Simulator::trust_log() const { return impl_->trust_rows; }
const std::vector<RouteLogRow>& Simulator::route_log() const { return impl_->route_rows; }
const std::vector<CongestionLogRow>& Simulator::congestion_log() const {
  return impl_->congestion_rows;
}
const std::vector<RateLogRow>& Simulator::rate_log() const { return impl_->rate_rows; }
const std::vector<std::string>& Simulator::warnings() const { return impl_->warnings; }

}  // namespace tfcc::sim
