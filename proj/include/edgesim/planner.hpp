#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgesim/scaling.hpp"
#include "edgesim/types.hpp"

namespace edgesim {

struct PlanRequest {
  DeviceFleet fleet;
  ModelSpec model;
  WorkloadSpec workload;
  ScalingParams params;
  // current temperature per device id; absent devices assumed at ambient
  std::map<std::string, double> thermal_state;
};

struct Constraint {
  std::string name;
  bool satisfied = true;
  double slack = 0;
};

struct PlanDiagnostics {
  std::vector<std::pair<std::string, double>> device_ranking;  // id, FLOPs/J
  std::map<std::string, int> max_layers_per_device;
  std::vector<Constraint> constraint_report;
  std::vector<std::string> notes;
};

// Devices ordered by energy efficiency 2*f*n_cores/P descending; ties by
// priority (lower first), then id.
std::vector<std::pair<std::string, double>> rank_devices(const DeviceFleet& fleet);

// Predicted totals for a concrete assignment (device id per inventory slot).
// Energy covers per-layer compute shares plus transfer legs; latency covers
// prefill/decode/io plus the cross-device scheduling overhead.
struct PlanPrediction {
  double energy = 0;
  LatencyBreakdown latency;
  double power = 0;
  std::map<std::string, double> per_device_mem;
  int devices_used = 0;
};
PlanPrediction predict(const std::vector<std::string>& assignment, const PlanRequest& req);

std::vector<Constraint> check_constraints(const AllocationPlan& plan, const PlanRequest& req);

// Embedding and head pinned to the most efficient device that fits them;
// decoder layers then placed greedily by marginal per-layer energy under the
// running memory totals. Devices hotter than 0.85 * t_max are excluded up
// front. Infeasibility is reported in the plan status, never thrown.
std::pair<AllocationPlan, PlanDiagnostics> greedy_plan(const PlanRequest& req);

// Exhaustive minimum-energy assignment; ties broken by lexicographically
// smallest assignment vector. Throws std::length_error when |devices|^|layers|
// exceeds max_states.
AllocationPlan brute_force_plan(const PlanRequest& req, double max_states = 2e7);

}  // namespace edgesim
