#include "ncsbound/net_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include <fmt/format.h>

#include "ncsbound/error.hpp"

namespace ncsbound::net {

bool NetworkModel::is_station(std::string_view id) const {
  return std::find(stations.begin(), stations.end(), id) != stations.end();
}

const SwitchSpec* NetworkModel::find_switch(std::string_view id) const {
  auto it = std::find_if(switches.begin(), switches.end(), [&](const SwitchSpec& s) { return s.id == id; });
  return it == switches.end() ? nullptr : &*it;
}

const Link* NetworkModel::find_link(std::string_view from, std::string_view to) const {
  auto it = std::find_if(links.begin(), links.end(),
                         [&](const Link& l) { return l.from == from && l.to == to; });
  return it == links.end() ? nullptr : &*it;
}

const Stream* NetworkModel::find_stream(std::string_view id) const {
  auto it = std::find_if(streams.begin(), streams.end(), [&](const Stream& s) { return s.id == id; });
  return it == streams.end() ? nullptr : &*it;
}

const Stream& NetworkModel::stream(std::string_view id) const {
  if (const auto* s = find_stream(id)) return *s;
  throw UnknownStream("unknown stream '" + std::string(id) + "'");
}

std::size_t NetworkModel::node_order(std::string_view id) const {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i] == id) return i;
  }
  for (std::size_t i = 0; i < switches.size(); ++i) {
    if (switches[i].id == id) return stations.size() + i;
  }
  return stations.size() + switches.size();
}

double NetworkModel::max_attached_capacity(std::string_view switch_id) const {
  double best = 0.0;
  for (const auto& l : links) {
    if (l.from == switch_id || l.to == switch_id) best = std::max(best, l.capacity);
  }
  return best;
}

double NetworkModel::backplane(std::string_view switch_id) const {
  const auto* sw = find_switch(switch_id);
  if (sw == nullptr) throw InvalidModel("unknown switch '" + std::string(switch_id) + "'");
  if (sw->backplane_capacity) return *sw->backplane_capacity;
  return static_cast<double>(sw->port_count) * max_attached_capacity(switch_id);
}

void NetworkModel::add_duplex_link(const std::string& a, const std::string& b, double capacity) {
  links.push_back({a, b, capacity});
  links.push_back({b, a, capacity});
}

std::vector<std::string> node_path(const Stream& stream) {
  std::vector<std::string> path;
  path.reserve(stream.route.size() + 2);
  path.push_back(stream.source);
  path.insert(path.end(), stream.route.begin(), stream.route.end());
  path.push_back(stream.destination);
  return path;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::DuplicateId:
      return "duplicate id";
    case ViolationKind::UnknownNode:
      return "unknown node";
    case ViolationKind::UnknownSwitch:
      return "unknown switch";
    case ViolationKind::UnknownStation:
      return "unknown station";
    case ViolationKind::BadCapacity:
      return "bad capacity";
    case ViolationKind::BadPortCount:
      return "bad port count";
    case ViolationKind::PortsExceeded:
      return "ports exceeded";
    case ViolationKind::BackplaneTooSlow:
      return "backplane too slow";
    case ViolationKind::BadEnvelope:
      return "bad envelope";
    case ViolationKind::BadFrameLength:
      return "bad frame length";
    case ViolationKind::RouteLoop:
      return "route loop";
    case ViolationKind::MissingLink:
      return "missing link";
    case ViolationKind::Saturated:
      return "utilization >= 1";
  }
  return "?";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

ValidationReport validate(const NetworkModel& model) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string subject, std::string message) {
    report.violations.push_back({kind, std::move(subject), std::move(message)});
  };

  std::set<std::string> node_ids;
  for (const auto& s : model.stations) {
    if (!node_ids.insert(s).second) add(ViolationKind::DuplicateId, s, "node id declared twice");
  }
  for (const auto& sw : model.switches) {
    if (!node_ids.insert(sw.id).second) add(ViolationKind::DuplicateId, sw.id, "node id declared twice");
  }

  std::set<std::pair<std::string, std::string>> seen_links;
  for (const auto& l : model.links) {
    const std::string name = l.from + "->" + l.to;
    if (!node_ids.contains(l.from) || !node_ids.contains(l.to)) {
      add(ViolationKind::UnknownNode, name, "link endpoint is not a declared station or switch");
    }
    if (!(l.capacity > 0.0) || !std::isfinite(l.capacity)) {
      add(ViolationKind::BadCapacity, name, "link capacity must be positive");
    }
    if (!seen_links.insert({l.from, l.to}).second) add(ViolationKind::DuplicateId, name, "link declared twice");
  }

  for (const auto& sw : model.switches) {
    if (sw.port_count < 2) {
      add(ViolationKind::BadPortCount, sw.id, "a switch needs at least 2 ports");
    }
    std::set<std::string> neighbours;
    for (const auto& l : model.links) {
      if (l.from == sw.id) neighbours.insert(l.to);
      if (l.to == sw.id) neighbours.insert(l.from);
    }
    if (static_cast<int>(neighbours.size()) > sw.port_count) {
      add(ViolationKind::PortsExceeded, sw.id,
          fmt::format("{} neighbours attached to {} ports", neighbours.size(), sw.port_count));
    }
    if (sw.backplane_capacity && *sw.backplane_capacity < model.max_attached_capacity(sw.id)) {
      add(ViolationKind::BackplaneTooSlow, sw.id, "backplane slower than an attached link");
    }
  }

  std::set<std::string> stream_ids;
  std::map<std::pair<std::string, std::string>, double> load;
  for (const auto& st : model.streams) {
    if (!stream_ids.insert(st.id).second) add(ViolationKind::DuplicateId, st.id, "stream id declared twice");
    if (!model.is_station(st.source)) {
      add(ViolationKind::UnknownStation, st.id, "source '" + st.source + "' is not a station");
    }
    if (!model.is_station(st.destination)) {
      add(ViolationKind::UnknownStation, st.id, "destination '" + st.destination + "' is not a station");
    }
    if (!(st.envelope0.sigma >= 0.0) || !(st.envelope0.rho > 0.0) || !std::isfinite(st.envelope0.sigma) ||
        !std::isfinite(st.envelope0.rho)) {
      add(ViolationKind::BadEnvelope, st.id, "envelope needs sigma >= 0 and rho > 0");
    }
    if (!(st.max_frame_len > 0.0)) add(ViolationKind::BadFrameLength, st.id, "max_frame_len must be positive");

    bool route_ok = true;
    std::set<std::string> visited;
    for (const auto& hop : st.route) {
      if (model.find_switch(hop) == nullptr) {
        add(ViolationKind::UnknownSwitch, st.id, "route names unknown switch '" + hop + "'");
        route_ok = false;
      } else if (!visited.insert(hop).second) {
        add(ViolationKind::RouteLoop, st.id, "route crosses switch '" + hop + "' twice");
        route_ok = false;
      }
    }
    if (!route_ok) continue;

    const auto path = node_path(st);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (model.find_link(path[i], path[i + 1]) == nullptr) {
        add(ViolationKind::MissingLink, st.id, "no link " + path[i] + "->" + path[i + 1]);
        route_ok = false;
      }
    }
    if (!route_ok) continue;
    if (st.envelope0.rho > 0.0) {
      for (std::size_t i = 0; i + 1 < path.size(); ++i) load[{path[i], path[i + 1]}] += st.envelope0.rho;
    }
  }

  // Every component a stream crosses is fed by, or drains into, one of these
  // links; the backplane is at least as fast as any of them.
  for (const auto& l : model.links) {
    auto it = load.find({l.from, l.to});
    if (it == load.end() || !(l.capacity > 0.0)) continue;
    if (it->second >= l.capacity) {
      add(ViolationKind::Saturated, l.from + "->" + l.to,
          fmt::format("utilization >= 1 on link {}->{}: sum of rates {} B/s vs capacity {} B/s", l.from, l.to,
                      it->second, l.capacity));
    }
  }
  return report;
}

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Mux:
      return "mux";
    case ComponentKind::SharedQueue:
      return "shared_queue";
    case ComponentKind::Demux:
      return "demux";
    case ComponentKind::OutputQueue:
      return "output_queue";
  }
  return "?";
}

std::vector<ComponentRef> components_on_route(const NetworkModel& model, std::string_view stream_id) {
  const auto& st = model.stream(stream_id);
  const auto path = node_path(st);
  std::vector<ComponentRef> out;
  out.reserve(4 * st.route.size());
  for (std::size_t h = 0; h < st.route.size(); ++h) {
    const auto& ingress = path[h];
    const auto& egress = path[h + 2];
    for (auto kind : {ComponentKind::Mux, ComponentKind::SharedQueue, ComponentKind::Demux,
                      ComponentKind::OutputQueue}) {
      out.push_back({st.route[h], h + 1, kind, ingress, egress, kind == ComponentKind::Demux});
    }
  }
  return out;
}

std::optional<std::vector<std::string>> tree_route(const NetworkModel& model, std::string_view source,
                                                   std::string_view destination) {
  if (!model.is_station(source) || !model.is_station(destination)) return std::nullopt;
  if (model.find_link(source, destination) != nullptr) return std::vector<std::string>{};

  // BFS over switches, counting shortest paths so that ambiguity is reported.
  std::map<std::string, std::size_t> dist;
  std::map<std::string, std::size_t> ways;
  std::map<std::string, std::string> parent;
  std::deque<std::string> frontier;
  for (const auto& l : model.links) {
    if (l.from == source && model.find_switch(l.to) != nullptr && !dist.contains(l.to)) {
      dist[l.to] = 1;
      ways[l.to] = 1;
      frontier.push_back(l.to);
    }
  }
  while (!frontier.empty()) {
    auto node = frontier.front();
    frontier.pop_front();
    for (const auto& l : model.links) {
      if (l.from != node || model.find_switch(l.to) == nullptr) continue;
      auto it = dist.find(l.to);
      if (it == dist.end()) {
        dist[l.to] = dist[node] + 1;
        ways[l.to] = ways[node];
        parent[l.to] = node;
        frontier.push_back(l.to);
      } else if (it->second == dist[node] + 1) {
        ways[l.to] += ways[node];
      }
    }
  }

  std::optional<std::string> last;
  std::size_t best = 0;
  std::size_t total_ways = 0;
  for (const auto& l : model.links) {
    if (l.to != destination || !dist.contains(l.from)) continue;
    const auto d = dist[l.from];
    if (!last || d < best) {
      last = l.from;
      best = d;
      total_ways = ways[l.from];
    } else if (d == best) {
      total_ways += ways[l.from];
    }
  }
  if (!last || total_ways != 1) return std::nullopt;

  std::vector<std::string> route{*last};
  while (parent.contains(route.back())) route.push_back(parent[route.back()]);
  std::reverse(route.begin(), route.end());
  return route;
}

}  // namespace ncsbound::net
