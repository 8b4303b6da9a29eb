#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bound_kernels.hpp"
#include "ncsbound/calculus.hpp"
#include "ncsbound/error.hpp"

namespace ncsbound::calculus {

namespace {

using detail::Affine;
using detail::Topology;
using Selection = std::vector<std::vector<MuxSelection>>;

void ensure_valid(const net::NetworkModel& model) {
  const auto report = net::validate(model);
  if (report.ok()) return;
  std::string structural;
  std::string saturated;
  for (const auto& v : report.violations) {
    auto& sink = v.kind == net::ViolationKind::Saturated ? saturated : structural;
    if (!sink.empty()) sink += "; ";
    sink += v.subject + ": " + v.message;
  }
  if (!structural.empty()) throw InvalidModel(structural);
  throw NonConvergent("saturated component, no finite bound: " + saturated);
}

std::size_t var_index(const Topology& topo, std::size_t s, std::size_t h) { return topo.var_offset[s] + h - 1; }

Selection select_all(const Topology& topo, const BurstState& state) {
  Selection sel;
  sel.reserve(topo.ports.size());
  auto sigma_of = [&](std::size_t s, std::size_t h_in) { return state[s][h_in]; };
  for (const auto& port : topo.ports) {
    sel.push_back(detail::evaluate_port<double>(port, sigma_of, nullptr).selection);
  }
  return sel;
}

void linearise(BurstinessSystem& sys) {
  const auto& model = *sys.model;
  const auto& topo = *sys.topology;
  const auto n = static_cast<Eigen::Index>(topo.unknowns);
  sys.A = Eigen::MatrixXd::Identity(n, n);
  sys.phi = Eigen::VectorXd::Zero(n);

  auto sigma_of = [&](std::size_t s, std::size_t h_in) {
    if (h_in == 0) return Affine(model.streams[s].envelope0.sigma, n);
    return Affine::variable(static_cast<Eigen::Index>(var_index(topo, s, h_in)), n);
  };

  for (std::size_t p = 0; p < topo.ports.size(); ++p) {
    const auto& port = topo.ports[p];
    const auto eval = detail::evaluate_port<Affine>(port, sigma_of, &sys.selection[p]);
    for (std::size_t g = 0; g < port.groups.size(); ++g) {
      const Affine delay = eval.mux_delay[g] + eval.shared_delay + eval.output_delay;
      for (const auto& [s, h] : port.groups[g].members) {
        const auto row = static_cast<Eigen::Index>(var_index(topo, s, h));
        const auto& st = model.streams[s];
        // sigma[s][h] - sigma[s][h-1] - rho_s * D(s, h) = 0
        if (h > 1) {
          sys.A(row, static_cast<Eigen::Index>(var_index(topo, s, h - 1))) -= 1.0;
        } else {
          sys.phi[row] += st.envelope0.sigma;
        }
        sys.A.row(row) -= st.envelope0.rho * delay.coef.transpose();
        sys.phi[row] += st.envelope0.rho * delay.constant;
      }
    }
  }
}

BurstState state_from(const net::NetworkModel& model, const Topology& topo, const Eigen::VectorXd& x) {
  BurstState state = initial_state(model);
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    for (std::size_t h = 1; h < state[s].size(); ++h) {
      state[s][h] = x[static_cast<Eigen::Index>(var_index(topo, s, h))];
    }
  }
  return state;
}

// One Jacobi sweep across streams, accumulated along each route.
BurstState iterate(const net::NetworkModel& model, const Topology& topo, const BurstState& state) {
  auto sigma_of = [&](std::size_t s, std::size_t h_in) { return state[s][h_in]; };
  std::vector<std::vector<double>> delay(model.streams.size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) delay[s].resize(model.streams[s].route.size());
  for (const auto& port : topo.ports) {
    const auto eval = detail::evaluate_port<double>(port, sigma_of, nullptr);
    for (std::size_t g = 0; g < port.groups.size(); ++g) {
      const double d = eval.mux_delay[g] + eval.shared_delay + eval.output_delay;
      for (const auto& [s, h] : port.groups[g].members) delay[s][h - 1] = d;
    }
  }
  BurstState next = initial_state(model);
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const double rho = model.streams[s].envelope0.rho;
    for (std::size_t h = 1; h < next[s].size(); ++h) next[s][h] = next[s][h - 1] + rho * delay[s][h - 1];
  }
  return next;
}

double relative_change(const BurstState& a, const BurstState& b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t h = 0; h < a[s].size(); ++h) {
      const double scale = std::max(std::abs(a[s][h]), std::abs(b[s][h]));
      if (scale > 0.0) worst = std::max(worst, std::abs(a[s][h] - b[s][h]) / scale);
    }
  }
  return worst;
}

bool physical(const BurstState& state, double tolerance) {
  for (const auto& row : state) {
    for (std::size_t h = 0; h < row.size(); ++h) {
      if (!std::isfinite(row[h])) return false;
      if (h > 0 && row[h] < row[h - 1] - tolerance * std::max(1.0, std::abs(row[h - 1]))) return false;
    }
  }
  return true;
}

BurstinessSolution finish(const BurstinessSystem& sys, BurstState state, SolveMethod method, int rounds,
                          int iterations) {
  BurstinessSolution sol;
  const auto& model = *sys.model;
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    for (std::size_t h = 1; h < state[s].size(); ++h) {
      // The solved burstiness never drops below the value it entered with.
      state[s][h] = std::max(state[s][h], state[s][h - 1]);
      sol.values.push_back({model.streams[s].id, h, state[s][h]});
    }
  }
  sol.state = std::move(state);
  sol.method = method;
  sol.selection_rounds = rounds;
  sol.iterations = iterations;
  return sol;
}

}  // namespace

BurstinessSystem assemble_system(const net::NetworkModel& model) {
  ensure_valid(model);
  BurstinessSystem sys;
  sys.model = std::make_shared<const net::NetworkModel>(model);
  auto topo = std::make_shared<Topology>(detail::build_topology(*sys.model));
  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    for (std::size_t h = 1; h <= model.streams[s].route.size(); ++h) {
      sys.unknowns.push_back({model.streams[s].id, s, h});
    }
  }
  sys.topology = topo;
  sys.selection = select_all(*topo, initial_state(model));
  linearise(sys);
  return sys;
}

BurstinessSolution solve_burstiness(const BurstinessSystem& system, const SolverOptions& options) {
  if (!system.model || !system.topology) throw InvalidArgument("burstiness system was not assembled");
  const auto& model = *system.model;
  const auto& topo = *system.topology;

  if (topo.unknowns == 0) return finish(system, initial_state(model), SolveMethod::LinearSystem, 0, 0);

  if (!options.force_value_iteration) {
    BurstinessSystem current = system;
    std::vector<Selection> seen{current.selection};
    for (int round = 1; round <= options.max_selection_rounds; ++round) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(current.A);
      if (!lu.isInvertible()) break;
      const Eigen::VectorXd x = lu.solve(current.phi);
      if (!x.allFinite()) break;
      auto state = state_from(model, topo, x);
      if (!physical(state, options.tolerance)) break;
      auto selection = select_all(topo, state);
      if (selection == current.selection) {
        return finish(system, std::move(state), SolveMethod::LinearSystem, round, 0);
      }
      if (std::find(seen.begin(), seen.end(), selection) != seen.end()) break;
      seen.push_back(selection);
      current.selection = std::move(selection);
      linearise(current);
    }
  }

  // Value iteration from the initial envelopes converges to the least fixed
  // point whenever one exists.
  BurstState state = initial_state(model);
  for (int it = 1; it <= options.max_iterations; ++it) {
    BurstState next = iterate(model, topo, state);
    for (const auto& row : next) {
      for (double v : row) {
        if (!std::isfinite(v) || v > 1e300) throw NonConvergent("burstiness diverges");
      }
    }
    const double change = relative_change(state, next);
    state = std::move(next);
    if (change <= options.tolerance) {
      // A few extra sweeps tighten the fixed point well below the tolerance.
      for (int polish = 0; polish < 200 && relative_change(state, iterate(model, topo, state)) > 1e-15; ++polish) {
        state = iterate(model, topo, state);
      }
      return finish(system, std::move(state), SolveMethod::ValueIteration, 0, it);
    }
  }
  throw NonConvergent(fmt::format("burstiness not converged after {} iterations", options.max_iterations));
}

const StreamDelay& Analysis::stream(std::string_view id) const {
  auto it = std::find_if(streams.begin(), streams.end(), [&](const StreamDelay& d) { return d.stream_id == id; });
  if (it == streams.end()) throw UnknownStream("unknown stream '" + std::string(id) + "'");
  return *it;
}

Analysis analyze(const net::NetworkModel& model, const SolverOptions& options) {
  const auto system = assemble_system(model);
  Analysis out;
  out.solution = solve_burstiness(system, options);
  const auto& topo = *system.topology;
  const auto& state = out.solution.state;

  std::vector<std::vector<SwitchBound>> per_hop(model.streams.size());
  for (std::size_t s = 0; s < model.streams.size(); ++s) per_hop[s].resize(model.streams[s].route.size());
  auto sigma_of = [&](std::size_t s, std::size_t h_in) { return state[s][h_in]; };
  for (const auto& port : topo.ports) {
    const auto eval = detail::evaluate_port<double>(port, sigma_of, nullptr);
    for (std::size_t g = 0; g < port.groups.size(); ++g) {
      for (const auto& [s, h] : port.groups[g].members) {
        per_hop[s][h - 1] = detail::make_switch_bound(port, eval, g, h, model);
      }
    }
  }

  for (std::size_t s = 0; s < model.streams.size(); ++s) {
    const auto& st = model.streams[s];
    StreamDelay d;
    d.stream_id = st.id;
    d.sigma0 = st.envelope0.sigma;
    d.sigma_final = state[s].back();
    d.rho = st.envelope0.rho;
    d.end_to_end = st.route.empty() ? 0.0 : (d.sigma_final - d.sigma0) / d.rho;
    for (const auto& sb : per_hop[s]) d.switch_sum += sb.total();
    d.switches = std::move(per_hop[s]);
    out.streams.push_back(std::move(d));
  }
  return out;
}

double end_to_end_delay(const Analysis& analysis, std::string_view stream_id) {
  return analysis.stream(stream_id).end_to_end;
}

std::vector<CapacityPoint> capacity_sweep(const net::NetworkModel& model, std::span<const double> capacities) {
  std::vector<CapacityPoint> out;
  for (double capacity : capacities) {
    net::NetworkModel variant = model;
    for (auto& link : variant.links) link.capacity = capacity;
    for (auto& sw : variant.switches) sw.backplane_capacity.reset();
    CapacityPoint point;
    point.capacity = capacity;
    try {
      const auto analysis = analyze(variant);
      for (const auto& d : analysis.streams) point.delays.emplace_back(d.stream_id, d.end_to_end);
      point.solved = true;
    } catch (const Error& e) {
      point.error = e.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace ncsbound::calculus
