#pragma once

// Packet-level discrete-event model of the switched network, used as an
// independent check on the analytic bounds.
//
// Service model: full-duplex links, cut-through forwarding, a non-blocking
// shared-memory backplane and one FIFO per egress port. Stations shape each
// stream with a token bucket (sigma, rho) evaluated when the frame starts on
// the wire, so emitted traffic conforms to the declared envelope by
// construction (and is re-checked online).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ncsbound/net_model.hpp"

namespace ncsbound::des {

enum class WorkloadKind { Greedy, Random };

struct Workload {
  WorkloadKind kind = WorkloadKind::Greedy;
  std::uint64_t seed = 0;  // ignored by the greedy workload

  static Workload greedy() { return {WorkloadKind::Greedy, 0}; }
  static Workload random(std::uint64_t seed) { return {WorkloadKind::Random, seed}; }
  std::string label() const;
};

struct HopTimes {
  std::string switch_id;
  double header_in = 0.0;     // first bit reaches the switch
  double egress_start = 0.0;  // first bit leaves on the egress link
  double egress_end = 0.0;    // last bit leaves
};

struct FrameEvent {
  std::string stream_id;
  std::size_t seq = 0;
  double emit_time = 0.0;  // first bit on the source link
  double length = 0.0;     // bytes
  std::vector<HopTimes> hops;
  double delivered = 0.0;      // last bit at the destination
  double network_delay = 0.0;  // per-bit delay from first switch ingress to last switch egress

  double latency() const { return delivered - emit_time; }
};

struct StreamStats {
  std::string stream_id;
  std::size_t frames = 0;
  double max_delay = 0.0;  // network delay, comparable with the analytic bound
  double mean_delay = 0.0;
  double max_latency = 0.0;  // emission to delivery
  std::optional<FrameEvent> worst;
};

struct PortBacklog {
  std::string switch_id;
  std::string egress;
  double max_backlog = 0.0;  // bytes
};

struct ObservedStats {
  std::vector<StreamStats> streams;  // model order
  std::vector<PortBacklog> ports;
  std::size_t frames = 0;

  const StreamStats& stream(std::string_view id) const;
};

struct SimOptions {
  bool record_trace = false;
};

struct SimResult {
  ObservedStats stats;
  std::vector<FrameEvent> trace;  // only with record_trace, in emission order
};

/// Deterministic in (model, workload, horizon). Frames emitted in
/// [0, horizon] are followed to delivery. Throws InvalidModel for a
/// structurally invalid model and InvalidArgument for horizon <= 0; an
/// overloaded link shows up as growing backlog, not as an error.
SimResult simulate(const net::NetworkModel& model, const Workload& workload, double horizon,
                   const SimOptions& options = {});

struct BoundCheck {
  bool holds = true;
  std::string stream_id;
  double bound = 0.0;
  double observed = 0.0;  // max over all workloads
  std::string workload;   // the one that produced `observed`
  std::optional<FrameEvent> evidence;
};

/// Compares the observed maximum delay of one stream against its analytic
/// end-to-end bound. Throws whatever the analysis throws.
BoundCheck check_bound(const net::NetworkModel& model, std::string_view stream_id,
                       std::span<const Workload> workloads, double horizon = 1.0);

void write_trace_csv(std::ostream& out, std::span<const FrameEvent> trace);

}  // namespace ncsbound::des
