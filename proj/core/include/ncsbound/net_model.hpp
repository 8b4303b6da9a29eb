#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ncsbound::net {

/// Affine arrival curve b(t) = sigma + rho * t.
/// sigma in bytes, rho in bytes/second.
struct TrafficEnvelope {
  double sigma = 0.0;
  double rho = 0.0;

  double at(double t) const { return sigma + rho * t; }
  friend bool operator==(const TrafficEnvelope&, const TrafficEnvelope&) = default;
};

/// A unidirectional flow from one station to another.
struct Stream {
  std::string id;
  std::string source;
  std::string destination;
  TrafficEnvelope envelope0;
  double max_frame_len = 0.0;  // bytes
  std::vector<std::string> route;  // switch ids, in crossing order
};

/// One direction of a full-duplex cable.
struct Link {
  std::string from;
  std::string to;
  double capacity = 0.0;  // bytes/second
};

struct SwitchSpec {
  std::string id;
  int port_count = 2;
  std::optional<double> backplane_capacity;  // bytes/second
};

struct NetworkModel {
  std::vector<std::string> stations;
  std::vector<SwitchSpec> switches;
  std::vector<Link> links;
  std::vector<Stream> streams;

  bool is_station(std::string_view id) const;
  const SwitchSpec* find_switch(std::string_view id) const;
  const Link* find_link(std::string_view from, std::string_view to) const;
  const Stream* find_stream(std::string_view id) const;
  const Stream& stream(std::string_view id) const;  // throws UnknownStream

  /// Position of a node in declaration order (stations first, then switches).
  std::size_t node_order(std::string_view id) const;

  /// Largest capacity among links touching `switch_id` in either direction.
  double max_attached_capacity(std::string_view switch_id) const;

  /// Declared backplane, or port_count x largest attached link capacity.
  double backplane(std::string_view switch_id) const;

  /// Adds both directions of a cable.
  void add_duplex_link(const std::string& a, const std::string& b, double capacity);
};

/// source, every switch on the route, destination.
std::vector<std::string> node_path(const Stream& stream);

enum class ViolationKind {
  DuplicateId,
  UnknownNode,
  UnknownSwitch,
  UnknownStation,
  BadCapacity,
  BadPortCount,
  PortsExceeded,
  BackplaneTooSlow,
  BadEnvelope,
  BadFrameLength,
  RouteLoop,
  MissingLink,
  Saturated,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string subject;  // the offending element
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

/// Collects every structural problem and every saturated link. Pure.
ValidationReport validate(const NetworkModel& model);

enum class ComponentKind { Mux, SharedQueue, Demux, OutputQueue };

std::string_view to_string(ComponentKind kind);

/// One basic component a stream crosses inside a switch.
struct ComponentRef {
  std::string switch_id;
  std::size_t hop = 0;  // 1-based switch index along the route
  ComponentKind kind = ComponentKind::Mux;
  std::string ingress;  // node the stream enters from
  std::string egress;   // node the stream leaves to
  bool zero_delay = false;
};

/// Expands the route into [mux, shared queue, demux, output queue] per switch.
std::vector<ComponentRef> components_on_route(const NetworkModel& model, std::string_view stream_id);

/// Unique switch path between two stations over the declared links, or
/// nullopt when the topology offers none or several (not a tree).
std::optional<std::vector<std::string>> tree_route(const NetworkModel& model,
                                                   std::string_view source,
                                                   std::string_view destination);

}  // namespace ncsbound::net
