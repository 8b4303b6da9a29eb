#include "ncsbound/des_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <random>
#include <tuple>

#include <fmt/format.h>

#include "ncsbound/calculus.hpp"
#include "ncsbound/error.hpp"

namespace ncsbound::des {

std::string Workload::label() const {
  return kind == WorkloadKind::Greedy ? std::string("greedy") : fmt::format("random:{}", seed);
}

const StreamStats& ObservedStats::stream(std::string_view id) const {
  auto it = std::find_if(streams.begin(), streams.end(), [&](const StreamStats& s) { return s.stream_id == id; });
  if (it == streams.end()) throw UnknownStream("unknown stream '" + std::string(id) + "'");
  return *it;
}

namespace {

constexpr double kMinRandomFrame = 64.0;

struct Frame {
  std::size_t stream = 0;
  std::size_t seq = 0;
  double emit = 0.0;
  double length = 0.0;
  double first_in = 0.0;      // header at the first switch
  double first_in_end = 0.0;  // last bit at the first switch
  double last_start = 0.0;
  double last_end = 0.0;
  double delivered = 0.0;
  std::vector<HopTimes> hops;
};

// Leaky-bucket shaped source for one stream.
class Source {
 public:
  Source(const net::Stream& stream, std::size_t index, const Workload& workload)
      : sigma_(stream.envelope0.sigma),
        rho_(stream.envelope0.rho),
        cap_(std::min(stream.max_frame_len, stream.envelope0.sigma)),
        random_(workload.kind == WorkloadKind::Random),
        level_(sigma_) {
    std::seed_seq seq{static_cast<std::uint32_t>(workload.seed), static_cast<std::uint32_t>(workload.seed >> 32),
                      static_cast<std::uint32_t>(index)};
    rng_.seed(seq);
    active_ = cap_ > 0.0;
    if (active_) next_frame();
  }

  bool active() const { return active_; }
  double release() const { return release_; }
  double length() const { return length_; }
  std::size_t seq() const { return seq_; }

  // Puts the pending frame on the wire at `start` >= release().
  void emit(double start) {
    level_ = std::min(sigma_, level_ + rho_ * (start - stamp_)) - length_;
    if (level_ < 0.0) level_ = 0.0;  // rounding only; start >= release guarantees enough tokens
    stamp_ = start;

    // Running check of A(s_i, s_j] <= sigma + rho (s_j - s_i) over every
    // pair of emissions.
    best_ = std::max(best_, rho_ * start - sent_);
    sent_ += length_;
    const double excess = sent_ - rho_ * start + best_ - sigma_;
    if (excess > 1e-6 * std::max(1.0, sigma_)) {
      throw Error(fmt::format("generated traffic exceeds its envelope by {} bytes", excess));
    }
    ++seq_;
    next_frame();
  }

 private:
  void next_frame() {
    if (random_) {
      const double lo = std::min(kMinRandomFrame, cap_);
      length_ = std::uniform_real_distribution<double>(lo, cap_)(rng_);
      length_ = std::max(lo, std::floor(length_));
    } else {
      length_ = cap_;
    }
    const double tokens = std::min(sigma_, level_);
    double ready = stamp_ + std::max(0.0, (length_ - tokens) / rho_);
    if (random_) ready += std::uniform_real_distribution<double>(0.0, length_ / rho_)(rng_);
    release_ = ready;
  }

  double sigma_;
  double rho_;
  double cap_;
  bool random_;
  double level_;
  double stamp_ = 0.0;
  double release_ = 0.0;
  double length_ = 0.0;
  double sent_ = 0.0;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t seq_ = 0;
  bool active_ = false;
  std::mt19937_64 rng_;
};

struct PortState {
  std::string switch_id;
  std::string egress;
  double capacity = 0.0;
  double free_at = 0.0;
  double max_backlog = 0.0;
  std::deque<std::tuple<double, double, double>> in_service;  // start, end, length
};

struct Event {
  double time;
  std::size_t stream;
  std::size_t seq;
  std::size_t hop;
  std::size_t frame;
  double last_bit;  // when the last bit reaches the switch

  bool operator>(const Event& o) const {
    return std::tie(time, stream, seq, hop) > std::tie(o.time, o.stream, o.seq, o.hop);
  }
};

double remaining(const std::tuple<double, double, double>& job, double t) {
  const auto& [start, end, length] = job;
  if (t <= start) return length;
  return length * (end - t) / (end - start);
}

}  // namespace

SimResult simulate(const net::NetworkModel& model, const Workload& workload, double horizon,
                   const SimOptions& options) {
  if (!(horizon > 0.0)) throw InvalidArgument("simulation horizon must be positive");
  const auto report = net::validate(model);
  for (const auto& v : report.violations) {
    if (v.kind != net::ViolationKind::Saturated) throw InvalidModel(v.subject + ": " + v.message);
  }

  const std::size_t n = model.streams.size();

  // Egress ports, and for every stream the port index of each hop plus the
  // capacity of its source link.
  std::vector<PortState> ports;
  std::map<std::pair<std::string, std::string>, std::size_t> port_index;
  std::vector<std::vector<std::size_t>> hop_port(n);
  std::vector<double> source_capacity(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto path = net::node_path(model.streams[s]);
    source_capacity[s] = model.find_link(path[0], path[1])->capacity;
    for (std::size_t h = 1; h + 1 < path.size(); ++h) {
      auto [it, fresh] = port_index.try_emplace({path[h], path[h + 1]}, ports.size());
      if (fresh) {
        PortState p;
        p.switch_id = path[h];
        p.egress = path[h + 1];
        p.capacity = model.find_link(path[h], path[h + 1])->capacity;
        ports.push_back(std::move(p));
      }
      hop_port[s].push_back(it->second);
    }
  }

  // Source links: streams leaving one station towards one neighbour share a
  // FIFO link; among pending frames the earliest release goes first.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> source_links;
  for (std::size_t s = 0; s < n; ++s) {
    const auto path = net::node_path(model.streams[s]);
    source_links[{path[0], path[1]}].push_back(s);
  }

  std::vector<Frame> frames;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (const auto& [link, members] : source_links) {
    std::vector<Source> sources;
    sources.reserve(members.size());
    for (auto s : members) sources.emplace_back(model.streams[s], s, workload);
    const double capacity = source_capacity[members.front()];
    double link_free = 0.0;
    while (true) {
      std::size_t pick = sources.size();
      double start = 0.0;
      for (std::size_t m = 0; m < sources.size(); ++m) {
        if (!sources[m].active()) continue;
        const double t = std::max(link_free, sources[m].release());
        if (pick == sources.size() || t < start) {
          pick = m;
          start = t;
        }
      }
      if (pick == sources.size() || start > horizon) break;

      auto& src = sources[pick];
      Frame f;
      f.stream = members[pick];
      f.seq = src.seq();
      f.emit = start;
      f.length = src.length();
      const double last_bit = start + f.length / capacity;
      link_free = last_bit;
      src.emit(start);

      if (hop_port[f.stream].empty()) {
        f.delivered = last_bit;
      } else {
        f.first_in = start;
        f.first_in_end = last_bit;
        events.push({start, f.stream, f.seq, 0, frames.size(), last_bit});
      }
      frames.push_back(std::move(f));
    }
  }

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    auto& f = frames[ev.frame];
    auto& port = ports[hop_port[ev.stream][ev.hop]];
    const double tx = f.length / port.capacity;

    while (!port.in_service.empty() && std::get<1>(port.in_service.front()) <= ev.time) port.in_service.pop_front();
    double backlog = f.length;
    for (const auto& job : port.in_service) backlog += remaining(job, ev.time);
    port.max_backlog = std::max(port.max_backlog, backlog);

    // Cut-through: start once the header is in and the port is free, but
    // never so early that transmission would overtake reception.
    const double start = std::max({port.free_at, ev.time, ev.last_bit - tx});
    const double end = start + tx;
    port.free_at = end;
    port.in_service.emplace_back(start, end, f.length);

    if (options.record_trace) f.hops.push_back({port.switch_id, ev.time, start, end});
    if (ev.hop + 1 < hop_port[ev.stream].size()) {
      events.push({start, ev.stream, ev.seq, ev.hop + 1, ev.frame, end});
    } else {
      f.last_start = start;
      f.last_end = end;
      f.delivered = end;
    }
  }

  SimResult result;
  auto& stats = result.stats;
  stats.frames = frames.size();
  stats.streams.resize(n);
  for (std::size_t s = 0; s < n; ++s) stats.streams[s].stream_id = model.streams[s].id;
  // Per-bit delay between entering the first switch and leaving the last
  // one; bits arrive at the ingress rate and leave at the egress rate, so
  // the extreme is at the first or the last bit.
  auto network_delay = [&](const Frame& f) {
    if (hop_port[f.stream].empty()) return 0.0;
    return std::max(f.last_start - f.first_in, f.last_end - f.first_in_end);
  };
  std::vector<double> sums(n, 0.0);
  for (const auto& f : frames) {
    const double delay = network_delay(f);
    auto& st = stats.streams[f.stream];
    ++st.frames;
    sums[f.stream] += delay;
    st.max_latency = std::max(st.max_latency, f.delivered - f.emit);
    if (!st.worst || delay > st.max_delay) {
      st.max_delay = delay;
      FrameEvent ev{st.stream_id, f.seq, f.emit, f.length, f.hops, f.delivered, delay};
      st.worst = std::move(ev);
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    auto& st = stats.streams[s];
    if (st.frames > 0) st.mean_delay = sums[s] / static_cast<double>(st.frames);
  }
  for (const auto& p : ports) stats.ports.push_back({p.switch_id, p.egress, p.max_backlog});

  if (options.record_trace) {
    std::vector<std::size_t> order(frames.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(frames[a].emit, frames[a].stream, frames[a].seq) <
             std::tie(frames[b].emit, frames[b].stream, frames[b].seq);
    });
    result.trace.reserve(frames.size());
    for (auto i : order) {
      auto& f = frames[i];
      const double delay = network_delay(f);
      result.trace.push_back({model.streams[f.stream].id, f.seq, f.emit, f.length, std::move(f.hops), f.delivered,
                              delay});
    }
  }
  return result;
}

BoundCheck check_bound(const net::NetworkModel& model, std::string_view stream_id,
                       std::span<const Workload> workloads, double horizon) {
  const auto analysis = calculus::analyze(model);
  BoundCheck out;
  out.stream_id = std::string(stream_id);
  out.bound = calculus::end_to_end_delay(analysis, stream_id);
  for (const auto& w : workloads) {
    const auto sim = simulate(model, w, horizon);
    const auto& st = sim.stats.stream(stream_id);
    if (out.workload.empty() || st.max_delay > out.observed) {
      out.observed = st.max_delay;
      out.workload = w.label();
      out.evidence = st.worst;
    }
  }
  out.holds = out.observed <= out.bound * (1.0 + 1e-9) + 1e-12;
  if (out.holds) out.evidence.reset();
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const FrameEvent> trace) {
  out << "stream,seq,emit_time,length,hop,switch,header_in,egress_start,egress_end,delivered,network_delay,latency\n";
  for (const auto& f : trace) {
    if (f.hops.empty()) {
      out << fmt::format("{},{},{:.9g},{:g},0,,,,,{:.9g},{:.9g},{:.9g}\n", f.stream_id, f.seq, f.emit_time, f.length,
                         f.delivered, f.network_delay, f.latency());
      continue;
    }
    for (std::size_t h = 0; h < f.hops.size(); ++h) {
      const auto& hop = f.hops[h];
      out << fmt::format("{},{},{:.9g},{:g},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", f.stream_id, f.seq,
                         f.emit_time, f.length, h + 1, hop.switch_id, hop.header_in, hop.egress_start, hop.egress_end,
                         f.delivered, f.network_delay, f.latency());
    }
  }
}

}  // namespace ncsbound::des
