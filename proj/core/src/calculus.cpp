#include "ncsbound/calculus.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "bound_kernels.hpp"
#include "ncsbound/error.hpp"

namespace ncsbound::calculus {

namespace {

std::vector<detail::GenericInput<double>> to_generic(std::span<const MuxInput> inputs, double out_capacity) {
  std::vector<detail::GenericInput<double>> out;
  out.reserve(inputs.size());
  double rho_sum = 0.0;
  for (const auto& in : inputs) {
    detail::require_stable(in.envelope.rho, in.link_capacity, "mux input '" + in.stream_id + "'");
    rho_sum += in.envelope.rho;
    out.push_back({in.envelope.sigma, in.envelope.rho, in.link_capacity, in.max_frame_len});
  }
  detail::require_stable(rho_sum, out_capacity, "mux output");
  return out;
}

void check_index(std::size_t index, std::size_t size) {
  if (index >= size) throw InvalidArgument("mux input index out of range");
}

}  // namespace

double backlog_at(double t, std::span<const MuxInput> inputs, double out_capacity) {
  if (!(t >= 0.0)) throw InvalidArgument("backlog_at needs t >= 0");
  double total = -out_capacity * t;
  for (std::size_t z = 0; z < inputs.size(); ++z) {
    const auto& in = inputs[z];
    const double shift = z == 0 ? 0.0 : in.max_frame_len / in.link_capacity;
    total += in.envelope.at(t + shift);
  }
  return std::max(total, 0.0);
}

double bursty_period(const MuxInput& input, bool as_dominant) {
  detail::require_stable(input.envelope.rho, input.link_capacity, "mux input '" + input.stream_id + "'");
  const double dominant = input.envelope.sigma / (input.link_capacity - input.envelope.rho);
  if (as_dominant) return dominant;
  return std::max(0.0, dominant - input.max_frame_len / input.link_capacity);
}

double mux_backlog_bound(std::size_t i, std::size_t k, std::span<const MuxInput> inputs, double out_capacity) {
  check_index(i, inputs.size());
  check_index(k, inputs.size());
  const auto generic = to_generic(inputs, out_capacity);
  bool period_clamped = false;
  if (k != i) {
    const auto& in = generic[k];
    period_clamped = detail::raw_nondominant_period(in.sigma, in.rho, in.capacity, in.frame) < 0.0;
  }
  return std::max(0.0, detail::candidate_backlog(generic, i, k, out_capacity, period_clamped));
}

BoundResult mux_delay_bound(std::size_t i, std::span<const MuxInput> inputs, double out_capacity) {
  check_index(i, inputs.size());
  const auto generic = to_generic(inputs, out_capacity);
  double backlog = 0.0;
  const auto sel = detail::select_candidate(generic, i, out_capacity, &backlog);
  return {backlog / out_capacity, backlog, sel.argmin, inputs[sel.argmin].stream_id};
}

double queue_delay_bound(const TrafficEnvelope& envelope_in, double in_capacity, double out_capacity) {
  return detail::generic_queue_delay(envelope_in.sigma, envelope_in.rho, in_capacity, out_capacity, "FIFO queue");
}

TrafficEnvelope propagate_envelope(const TrafficEnvelope& envelope, double delay_bound) {
  if (!(delay_bound >= 0.0)) throw InvalidArgument("delay bound must be non-negative");
  return {envelope.sigma + envelope.rho * delay_bound, envelope.rho};
}

BurstState initial_state(const net::NetworkModel& model) {
  BurstState state;
  state.reserve(model.streams.size());
  for (const auto& st : model.streams) {
    state.emplace_back(st.route.size() + 1, st.envelope0.sigma);
  }
  return state;
}

namespace detail {

Topology build_topology(const net::NetworkModel& model) {
  // (switch order, egress order) -> port, and within a port
  // ingress order -> group; both orders follow declaration order.
  using PortKey = std::pair<std::size_t, std::size_t>;
  std::map<PortKey, std::map<std::size_t, PortGroup>> grouped;
  std::map<PortKey, Port> ports;

  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const auto& st = model.streams[s];
    const auto path = net::node_path(st);
    for (std::size_t h = 1; h <= st.route.size(); ++h) {
      const auto& sw = path[h];
      const auto& ingress = path[h - 1];
      const auto& egress = path[h + 1];
      const PortKey key{model.node_order(sw), model.node_order(egress)};
      auto [pit, fresh] = ports.try_emplace(key);
      if (fresh) {
        const auto* out_link = model.find_link(sw, egress);
        if (out_link == nullptr) throw InvalidModel("no link " + sw + "->" + egress);
        pit->second.switch_id = sw;
        pit->second.egress = egress;
        pit->second.out_capacity = out_link->capacity;
        pit->second.backplane = model.backplane(sw);
      }
      pit->second.rho += st.envelope0.rho;

      auto& group = grouped[key][model.node_order(ingress)];
      if (group.members.empty()) {
        const auto* in_link = model.find_link(ingress, sw);
        if (in_link == nullptr) throw InvalidModel("no link " + ingress + "->" + sw);
        group.ingress = ingress;
        group.capacity = in_link->capacity;
      }
      group.max_frame = std::max(group.max_frame, st.max_frame_len);
      group.rho += st.envelope0.rho;
      group.members.emplace_back(s, h);
    }
  }

  Topology topo;
  topo.hops.resize(model.streams.size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    topo.hops[s].resize(model.streams[s].route.size());
    topo.var_offset.push_back(topo.unknowns);
    topo.unknowns += model.streams[s].route.size();
  }
  for (auto& [key, port] : ports) {
    const std::size_t port_index = topo.ports.size();
    for (auto& [order, group] : grouped[key]) {
      const std::size_t group_index = port.groups.size();
      for (const auto& [s, h] : group.members) topo.hops[s][h - 1] = {port_index, group_index};
      port.groups.push_back(std::move(group));
    }
    topo.ports.push_back(std::move(port));
  }
  return topo;
}

SwitchBound make_switch_bound(const Port& port, const PortEval<double>& eval, std::size_t group, std::size_t hop,
                              const net::NetworkModel& model) {
  SwitchBound out;
  out.switch_id = port.switch_id;
  out.hop = hop;
  out.ingress = port.groups[group].ingress;
  out.egress = port.egress;
  const auto& sel = eval.selection[group];
  std::string argmin_id;
  for (const auto& [s, h] : port.groups[sel.argmin].members) {
    if (!argmin_id.empty()) argmin_id += '+';
    argmin_id += model.streams[s].id;
  }
  out.mux = {eval.mux_delay[group], eval.mux_backlog[group], sel.argmin, std::move(argmin_id)};
  out.shared_queue_delay = eval.shared_delay;
  out.shared_queue_backlog = eval.shared_delay * port.backplane;
  out.output_queue_delay = eval.output_delay;
  out.output_queue_backlog = eval.output_delay * port.out_capacity;
  return out;
}

}  // namespace detail

SwitchBound switch_delay_bound(std::string_view stream_id, std::size_t hop, const BurstState& state,
                               const net::NetworkModel& model) {
  const auto& st = model.stream(stream_id);
  if (hop == 0 || hop > st.route.size()) throw InvalidArgument("hop outside the route of '" + st.id + "'");
  const auto stream_index = static_cast<std::size_t>(&st - model.streams.data());
  if (state.size() != model.streams.size()) throw InvalidArgument("burstiness state does not match the model");

  const auto topo = detail::build_topology(model);
  const auto ref = topo.hops[stream_index][hop - 1];
  const auto& port = topo.ports[ref.port];
  auto sigma_of = [&](std::size_t s, std::size_t h_in) { return state.at(s).at(h_in); };
  const auto eval = detail::evaluate_port<double>(port, sigma_of, nullptr);

  return detail::make_switch_bound(port, eval, ref.group, hop, model);
}

}  // namespace ncsbound::calculus
