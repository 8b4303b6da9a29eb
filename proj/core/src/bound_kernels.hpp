#pragma once

// Bound formulas written once over a scalar type. Instantiated with double
// for evaluation and with Affine to linearise the burstiness equations.

#include <algorithm>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "ncsbound/calculus.hpp"
#include "ncsbound/error.hpp"

namespace ncsbound::calculus::detail {

/// c + sum_j coef[j] * x[j]
struct Affine {
  double constant = 0.0;
  Eigen::VectorXd coef;

  Affine() = default;
  Affine(double c, Eigen::Index n) : constant(c), coef(Eigen::VectorXd::Zero(n)) {}

  static Affine variable(Eigen::Index index, Eigen::Index n) {
    Affine a(0.0, n);
    a.coef[index] = 1.0;
    return a;
  }

  Affine& operator+=(const Affine& o) {
    constant += o.constant;
    coef += o.coef;
    return *this;
  }
  Affine& operator-=(const Affine& o) {
    constant -= o.constant;
    coef -= o.coef;
    return *this;
  }
  Affine& operator+=(double v) {
    constant += v;
    return *this;
  }
  Affine& operator*=(double v) {
    constant *= v;
    coef *= v;
    return *this;
  }
  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, const Affine& b) { return a -= b; }
  friend Affine operator+(Affine a, double v) { return a += v; }
  friend Affine operator-(Affine a, double v) { return a += -v; }
  friend Affine operator*(Affine a, double v) { return a *= v; }
  friend Affine operator*(double v, Affine a) { return a *= v; }
  friend Affine operator/(Affine a, double v) { return a *= 1.0 / v; }
};

template <class S>
S zero_like(const S& like) {
  if constexpr (std::is_same_v<S, double>) {
    return 0.0;
  } else {
    return S(0.0, like.coef.size());
  }
}

/// A multiplexer input whose burstiness may be symbolic.
template <class S>
struct GenericInput {
  S sigma;
  double rho = 0.0;
  double capacity = 0.0;
  double frame = 0.0;
};

inline void require_stable(double rho, double capacity, const std::string& what) {
  if (!(rho < capacity)) {
    throw UnstableInput(what + ": rate " + std::to_string(rho) + " B/s reaches capacity " +
                        std::to_string(capacity) + " B/s");
  }
}

/// Raw non-dominant bursty period, before clamping (numeric only).
inline double raw_nondominant_period(double sigma, double rho, double capacity, double frame) {
  return sigma / (capacity - rho) - frame / capacity;
}

/// Candidate backlog for the data of input i over the bursty period of k.
/// `period_clamped` replaces a negative non-dominant period by zero.
template <class S>
S candidate_backlog(const std::vector<GenericInput<S>>& in, std::size_t i, std::size_t k, double out_capacity,
                    bool period_clamped) {
  const auto& ik = in[k];
  S u = zero_like(ik.sigma);
  if (k == i) {
    u = ik.sigma / (ik.capacity - ik.rho);
  } else if (!period_clamped) {
    u = ik.sigma / (ik.capacity - ik.rho) - ik.frame / ik.capacity;
  }

  S total = zero_like(ik.sigma);
  for (std::size_t z = 0; z < in.size(); ++z) {
    if (z == k) continue;
    total += in[z].sigma + in[z].rho * (u + in[z].frame / in[z].capacity);
  }
  total += u * (ik.capacity - out_capacity);
  if (k != i) {
    total += -in[i].rho * in[i].frame / in[i].capacity + ik.frame;
  }
  return total;
}

/// Picks the minimising candidate numerically and records active clamps.
inline MuxSelection select_candidate(const std::vector<GenericInput<double>>& in, std::size_t i,
                                     double out_capacity, double* backlog_out) {
  MuxSelection best;
  double best_value = 0.0;
  for (std::size_t k = 0; k < in.size(); ++k) {
    bool period_clamped = false;
    if (k != i) {
      period_clamped = raw_nondominant_period(in[k].sigma, in[k].rho, in[k].capacity, in[k].frame) < 0.0;
    }
    double raw = candidate_backlog(in, i, k, out_capacity, period_clamped);
    bool backlog_clamped = raw < 0.0;
    double value = backlog_clamped ? 0.0 : raw;
    if (k == 0 || value < best_value) {
      best_value = value;
      best = {k, period_clamped, backlog_clamped};
    }
  }
  if (backlog_out != nullptr) *backlog_out = best_value;
  return best;
}

template <class S>
S selected_backlog(const std::vector<GenericInput<S>>& in, std::size_t i, double out_capacity,
                   const MuxSelection& sel) {
  if (sel.backlog_clamped) return zero_like(in[i].sigma);
  return candidate_backlog(in, i, sel.argmin, out_capacity, sel.period_clamped);
}

/// FIFO queue delay, linear in sigma. Zero when fed no faster than drained.
template <class S>
S generic_queue_delay(const S& sigma, double rho, double in_capacity, double out_capacity, const std::string& what) {
  require_stable(rho, in_capacity, what);
  require_stable(rho, out_capacity, what);
  if (in_capacity <= out_capacity) return zero_like(sigma);
  return sigma * ((in_capacity - out_capacity) / ((in_capacity - rho) * out_capacity));
}

struct HopRef {
  std::size_t port = 0;
  std::size_t group = 0;
};

/// Streams sharing one ingress link on their way to one egress port.
struct PortGroup {
  std::string ingress;
  double capacity = 0.0;
  double max_frame = 0.0;
  double rho = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> members;  // (stream, hop)
};

/// An egress port of a switch and everything competing for it.
struct Port {
  std::string switch_id;
  std::string egress;
  double out_capacity = 0.0;
  double backplane = 0.0;
  double rho = 0.0;
  std::vector<PortGroup> groups;
};

struct Topology {
  std::vector<Port> ports;
  std::vector<std::vector<HopRef>> hops;  // hops[stream][hop - 1]
  std::vector<std::size_t> var_offset;    // unknown index of (s, h) = var_offset[s] + h - 1
  std::size_t unknowns = 0;
};

/// Requires a structurally valid model.
Topology build_topology(const net::NetworkModel& model);

/// Per-port evaluation: multiplexer backlog/delay per ingress group and the
/// two queue stages shared by every stream of the port.
template <class S>
struct PortEval {
  std::vector<S> mux_backlog;
  std::vector<S> mux_delay;
  std::vector<MuxSelection> selection;
  S shared_delay;
  S output_delay;
  S shared_sigma;  // aggregate entering the shared queue
  S output_sigma;  // aggregate entering the output queue
};

/// `sigma_of(stream, hop_in)` gives the burstiness entering the switch.
/// With `fixed == nullptr` the selection is chosen numerically (S = double).
template <class S, class SigmaOf>
PortEval<S> evaluate_port(const Port& port, SigmaOf&& sigma_of, const std::vector<MuxSelection>* fixed) {
  std::vector<GenericInput<S>> inputs;
  inputs.reserve(port.groups.size());
  for (const auto& g : port.groups) {
    S sigma = sigma_of(g.members.front().first, g.members.front().second - 1);
    for (std::size_t m = 1; m < g.members.size(); ++m) {
      sigma += sigma_of(g.members[m].first, g.members[m].second - 1);
    }
    require_stable(g.rho, g.capacity, "link " + g.ingress + "->" + port.switch_id);
    inputs.push_back({sigma, g.rho, g.capacity, g.max_frame});
  }
  require_stable(port.rho, port.out_capacity, "link " + port.switch_id + "->" + port.egress);

  PortEval<S> eval;
  eval.mux_backlog.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if constexpr (std::is_same_v<S, double>) {
      if (fixed == nullptr) {
        double backlog = 0.0;
        eval.selection.push_back(select_candidate(inputs, i, port.out_capacity, &backlog));
        eval.mux_backlog.push_back(backlog);
        continue;
      }
    }
    const auto& sel = (*fixed)[i];
    eval.selection.push_back(sel);
    eval.mux_backlog.push_back(selected_backlog(inputs, i, port.out_capacity, sel));
  }
  for (const auto& b : eval.mux_backlog) eval.mux_delay.push_back(b / port.out_capacity);

  const std::string where = "switch " + port.switch_id + " port to " + port.egress;
  eval.shared_sigma = zero_like(inputs.front().sigma);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    eval.shared_sigma += inputs[i].sigma + eval.mux_delay[i] * inputs[i].rho;
  }
  // The multiplexer feeds shared memory no faster than the egress rate.
  eval.shared_delay =
      generic_queue_delay(eval.shared_sigma, port.rho, port.out_capacity, port.backplane, where + " shared queue");
  eval.output_sigma = eval.shared_sigma + eval.shared_delay * port.rho;
  const double output_feed = std::min(port.backplane, port.out_capacity);
  eval.output_delay =
      generic_queue_delay(eval.output_sigma, port.rho, output_feed, port.out_capacity, where + " output queue");
  return eval;
}

SwitchBound make_switch_bound(const Port& port, const PortEval<double>& eval, std::size_t group, std::size_t hop,
                              const net::NetworkModel& model);

}  // namespace ncsbound::calculus::detail
