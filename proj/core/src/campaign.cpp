#include "ncsbound/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <fmt/format.h>

#include "ncsbound/calculus.hpp"
#include "ncsbound/des_oracle.hpp"
#include "ncsbound/error.hpp"

namespace ncsbound::des {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

net::NetworkModel random_model(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d6f64u};
  std::mt19937_64 rng(seq);

  net::NetworkModel model;
  const double capacity = uniform_int(rng, 0, 1) == 0 ? 1.25e6 : 1.25e7;
  const int switches = uniform_int(rng, 1, 3);

  std::vector<std::vector<std::string>> attached(static_cast<std::size_t>(switches));
  for (int k = 0; k < switches; ++k) {
    const int hosts = uniform_int(rng, 1, 3);
    for (int j = 0; j < hosts; ++j) {
      auto id = fmt::format("h{}", model.stations.size() + 1);
      model.stations.push_back(id);
      attached[static_cast<std::size_t>(k)].push_back(id);
    }
  }
  // A single switch still needs two stations to carry any stream.
  if (model.stations.size() < 2) {
    model.stations.push_back("h2");
    attached[0].push_back("h2");
  }

  for (int k = 0; k < switches; ++k) {
    const auto id = fmt::format("sw{}", k + 1);
    const auto& hosts = attached[static_cast<std::size_t>(k)];
    for (const auto& h : hosts) model.add_duplex_link(h, id, capacity);
    if (k > 0) model.add_duplex_link(fmt::format("sw{}", k), id, capacity);
    const int neighbours = static_cast<int>(hosts.size()) + (k > 0 ? 1 : 0) + (k + 1 < switches ? 1 : 0);
    net::SwitchSpec spec;
    spec.id = id;
    spec.port_count = std::max(2, neighbours + uniform_int(rng, 0, 2));
    if (uniform_int(rng, 0, 1) == 1) spec.backplane_capacity = capacity * uniform(rng, 1.0, spec.port_count);
    model.switches.push_back(spec);
  }

  const int streams = uniform_int(rng, 2, 8);
  std::vector<double> weight;
  for (int j = 0; j < streams; ++j) {
    const auto n = static_cast<int>(model.stations.size());
    const int src = uniform_int(rng, 0, n - 1);
    int dst = uniform_int(rng, 0, n - 2);
    if (dst >= src) ++dst;
    net::Stream st;
    st.id = fmt::format("f{}", j + 1);
    st.source = model.stations[static_cast<std::size_t>(src)];
    st.destination = model.stations[static_cast<std::size_t>(dst)];
    st.route = *net::tree_route(model, st.source, st.destination);
    st.envelope0.sigma = std::floor(uniform(rng, 64.0, 4000.0));
    st.max_frame_len = std::floor(uniform(rng, 64.0, 1526.0));
    weight.push_back(uniform(rng, 0.05, 1.0));
    model.streams.push_back(std::move(st));
  }

  // Scale the rates so the busiest link sits at the target utilisation.
  std::map<std::pair<std::string, std::string>, double> load;
  for (std::size_t j = 0; j < model.streams.size(); ++j) {
    const auto path = net::node_path(model.streams[j]);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) load[{path[i], path[i + 1]}] += weight[j];
  }
  double busiest = 0.0;
  for (const auto& [link, w] : load) busiest = std::max(busiest, w);
  const double target = uniform(rng, 0.1, 0.85);
  for (std::size_t j = 0; j < model.streams.size(); ++j) {
    model.streams[j].envelope0.rho = weight[j] / busiest * target * capacity;
  }
  return model;
}

net::NetworkModel mutate_model(const net::NetworkModel& model, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d7574u};
  std::mt19937_64 rng(seq);
  net::NetworkModel out = model;
  for (auto& st : out.streams) {
    st.envelope0.sigma = std::max(1.0, std::floor(st.envelope0.sigma * uniform(rng, 0.25, 4.0)));
    st.max_frame_len = std::clamp(std::floor(st.max_frame_len * uniform(rng, 0.5, 1.5)), 64.0, 1526.0);
    st.envelope0.rho *= uniform(rng, 0.5, 2.0);
  }

  std::map<std::pair<std::string, std::string>, double> load;
  for (const auto& st : out.streams) {
    const auto path = net::node_path(st);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) load[{path[i], path[i + 1]}] += st.envelope0.rho;
  }
  double busiest = 0.0;
  for (const auto& [link, rho] : load) {
    const auto* l = out.find_link(link.first, link.second);
    if (l != nullptr) busiest = std::max(busiest, rho / l->capacity);
  }
  const double target = uniform(rng, 0.1, 0.9);
  if (busiest > 0.0) {
    for (auto& st : out.streams) st.envelope0.rho *= target / busiest;
  }
  return out;
}

CampaignResult run_campaign(std::span<const NamedModel> fixed_models, const CampaignOptions& options) {
  std::vector<NamedModel> models(fixed_models.begin(), fixed_models.end());
  for (std::size_t m = 0; m < options.random_models; ++m) {
    const auto seed = options.model_seed + m;
    models.emplace_back(fmt::format("random-{}", seed), random_model(seed));
  }

  std::vector<Workload> workloads{Workload::greedy()};
  for (auto s : options.workload_seeds) workloads.push_back(Workload::random(s));

  CampaignResult out;
  for (const auto& [name, model] : models) {
    ++out.models;
    calculus::Analysis analysis;
    try {
      analysis = calculus::analyze(model);
    } catch (const Error& e) {
      out.unsolved.push_back(name + ": " + e.what());
      continue;
    }
    ++out.solved;
    for (const auto& d : analysis.streams) {
      out.max_identity_error = std::max(out.max_identity_error, relative_gap(d.end_to_end, d.switch_sum));
    }

    for (const auto& w : workloads) {
      const auto sim = simulate(model, w, options.horizon);
      ++out.simulations;
      out.frames += sim.stats.frames;
      for (const auto& st : sim.stats.streams) {
        const double bound = analysis.stream(st.stream_id).end_to_end;
        if (bound > 0.0) out.max_ratio = std::max(out.max_ratio, st.max_delay / bound);
        if (st.max_delay > bound * (1.0 + 1e-9) + 1e-12) {
          out.violations.push_back({name, st.stream_id, w.label(), bound, st.max_delay});
        }
      }
    }
  }
  return out;
}

}  // namespace ncsbound::des
