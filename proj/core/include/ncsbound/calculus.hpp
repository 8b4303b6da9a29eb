#pragma once

// Network-calculus bounds for the basic components of a shared-memory
// Ethernet switch, envelope propagation, and the end-to-end burstiness
// fixed point. Data in bytes, rates in bytes/second, time in seconds.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncsbound/net_model.hpp"

namespace ncsbound::calculus {

using net::TrafficEnvelope;

/// One input link of a FIFO multiplexer, possibly carrying an aggregate.
struct MuxInput {
  TrafficEnvelope envelope;
  double link_capacity = 0.0;
  double max_frame_len = 0.0;
  std::string stream_id;
};

struct BoundResult {
  double delay_bound = 0.0;    // seconds
  double backlog_bound = 0.0;  // bytes
  std::size_t argmin_k = 0;    // index into the input list
  std::string argmin_id;
};

/// Backlog of the multiplexer at time t: the first input's curve at t plus
/// every other input's curve shifted by its frame time, minus the drained
/// amount. Clamped at zero.
double backlog_at(double t, std::span<const MuxInput> inputs, double out_capacity);

/// Length of the bursty period of an input. The dominant form is
/// sigma / (C - rho); the non-dominant form subtracts L / C and clamps at 0.
double bursty_period(const MuxInput& input, bool as_dominant);

/// Backlog bound for the data of input `i` over the bursty period of
/// candidate `k`. Clamped at zero.
double mux_backlog_bound(std::size_t i, std::size_t k, std::span<const MuxInput> inputs, double out_capacity);

/// Delay bound for input `i`: the smallest candidate backlog over the output
/// capacity. Ties go to the lowest index.
BoundResult mux_delay_bound(std::size_t i, std::span<const MuxInput> inputs, double out_capacity);

/// FIFO queue fed at peak rate `in_capacity` and drained at `out_capacity`.
/// Zero when the queue drains at least as fast as it can be fed.
double queue_delay_bound(const TrafficEnvelope& envelope_in, double in_capacity, double out_capacity);

/// Output envelope of a component with delay bound `delay_bound`.
TrafficEnvelope propagate_envelope(const TrafficEnvelope& envelope, double delay_bound);

/// Burstiness of every stream along its route: state[s][0] is the initial
/// sigma of stream s (model order); state[s][h] is the sigma leaving its h-th
/// switch.
using BurstState = std::vector<std::vector<double>>;

BurstState initial_state(const net::NetworkModel& model);

/// Breakdown of one switch crossing.
struct SwitchBound {
  std::string switch_id;
  std::size_t hop = 0;  // 1-based
  std::string ingress;
  std::string egress;
  BoundResult mux;
  double shared_queue_delay = 0.0;
  double shared_queue_backlog = 0.0;
  double demux_delay = 0.0;
  double output_queue_delay = 0.0;
  double output_queue_backlog = 0.0;

  double total() const { return mux.delay_bound + shared_queue_delay + demux_delay + output_queue_delay; }
};

/// Delay bound of `stream_id` across its `hop`-th switch given the
/// burstiness of every stream entering that switch.
///
/// The multiplexer sits in front of the egress port and merges, per ingress
/// link, the streams heading to that port; it drains at the egress link
/// capacity. The shared-memory queue is fed by the multiplexer and drains at
/// the backplane rate; the output queue is fed by the shared memory and
/// drains at the egress link capacity.
SwitchBound switch_delay_bound(std::string_view stream_id, std::size_t hop, const BurstState& state,
                               const net::NetworkModel& model);

/// One burstiness unknown: sigma of a stream leaving its hop-th switch.
struct Unknown {
  std::string stream_id;
  std::size_t stream_index = 0;
  std::size_t hop = 0;  // 1-based
};

/// Which candidate attains the minimum at one multiplexer input, and which
/// clamps are active there. With these fixed every bound is affine in the
/// burstiness unknowns.
struct MuxSelection {
  std::size_t argmin = 0;
  bool period_clamped = false;
  bool backlog_clamped = false;

  friend bool operator==(const MuxSelection&, const MuxSelection&) = default;
};

namespace detail {
struct Topology;
}

/// A * psi = phi over the burstiness unknowns, linearised at one selection.
struct BurstinessSystem {
  std::shared_ptr<const net::NetworkModel> model;
  std::shared_ptr<const detail::Topology> topology;
  std::vector<Unknown> unknowns;
  std::vector<std::vector<MuxSelection>> selection;  // [port][input group]
  Eigen::MatrixXd A;
  Eigen::VectorXd phi;

  std::size_t dimension() const { return unknowns.size(); }
};

/// Builds the system with the selection taken at the initial envelopes.
/// Throws InvalidModel for a structurally broken model and NonConvergent when
/// a link is saturated.
BurstinessSystem assemble_system(const net::NetworkModel& model);

struct BurstinessValue {
  std::string stream_id;
  std::size_t hop = 0;
  double sigma = 0.0;
};

enum class SolveMethod { LinearSystem, ValueIteration };

struct SolverOptions {
  double tolerance = 1e-9;  // relative
  int max_iterations = 10000;
  int max_selection_rounds = 64;
  bool force_value_iteration = false;
};

struct BurstinessSolution {
  std::vector<BurstinessValue> values;
  BurstState state;
  SolveMethod method = SolveMethod::LinearSystem;
  int selection_rounds = 0;
  int iterations = 0;
};

/// Solves the system, re-linearising until the selection is stable. Falls
/// back to value iteration from the initial envelopes when the selection
/// cycles or the linear system is singular. Throws NonConvergent.
BurstinessSolution solve_burstiness(const BurstinessSystem& system, const SolverOptions& options = {});

struct StreamDelay {
  std::string stream_id;
  double sigma0 = 0.0;
  double sigma_final = 0.0;
  double rho = 0.0;
  double end_to_end = 0.0;  // (sigma_final - sigma0) / rho
  double switch_sum = 0.0;  // sum of per-switch bounds at the solution
  std::vector<SwitchBound> switches;
};

struct Analysis {
  BurstinessSolution solution;
  std::vector<StreamDelay> streams;

  const StreamDelay& stream(std::string_view id) const;
};

/// Full pipeline: validate, assemble, solve, then per-stream bounds.
Analysis analyze(const net::NetworkModel& model, const SolverOptions& options = {});

/// End-to-end bound of one stream from its solved burstiness.
double end_to_end_delay(const Analysis& analysis, std::string_view stream_id);

struct CapacityPoint {
  double capacity = 0.0;  // bytes/second
  bool solved = false;
  std::string error;
  std::vector<std::pair<std::string, double>> delays;  // stream id, end-to-end bound
};

/// Re-runs the analysis with every link set to each capacity in turn.
std::vector<CapacityPoint> capacity_sweep(const net::NetworkModel& model, std::span<const double> capacities);

}  // namespace ncsbound::calculus
