#pragma once

// Randomised soundness campaign: simulated delays against analytic bounds
// over generated tree networks.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncsbound/net_model.hpp"

namespace ncsbound::des {

/// A valid, unsaturated network of 1 to 3 switches in a chain with 2 to 8
/// streams routed along the unique tree path. Every link in one model has
/// the same capacity (10 or 100 Mb/s). Deterministic in `seed`.
net::NetworkModel random_model(std::uint64_t seed);

/// Perturbs burst sizes, frame lengths and rates of a valid model, then
/// rescales the rates so the busiest link stays below saturation. Topology,
/// routes and capacities are kept. Deterministic in `seed`.
net::NetworkModel mutate_model(const net::NetworkModel& model, std::uint64_t seed);

struct CampaignOptions {
  std::size_t random_models = 100;
  std::uint64_t model_seed = 1;  // model m uses model_seed + m
  std::vector<std::uint64_t> workload_seeds{1, 2, 3};
  double horizon = 0.2;  // seconds per simulation
};

struct CampaignViolation {
  std::string model;
  std::string stream_id;
  std::string workload;
  double bound = 0.0;
  double observed = 0.0;
};

struct CampaignResult {
  std::size_t models = 0;
  std::size_t solved = 0;
  std::size_t simulations = 0;
  std::size_t frames = 0;
  std::vector<std::string> unsolved;  // "model: reason"
  std::vector<CampaignViolation> violations;
  double max_ratio = 0.0;           // worst observed / bound
  double max_identity_error = 0.0;  // |end-to-end - sum of switch bounds|, relative
};

using NamedModel = std::pair<std::string, net::NetworkModel>;

/// Runs every fixed model, then the random ones, under the greedy workload
/// and one random workload per seed.
CampaignResult run_campaign(std::span<const NamedModel> fixed_models, const CampaignOptions& options = {});

}  // namespace ncsbound::des
