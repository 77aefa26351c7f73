#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgesim/planner.hpp"
#include "edgesim/report.hpp"
#include "edgesim/safety.hpp"
#include "edgesim/thermal.hpp"

namespace edgesim {

enum class FaultAction { Fail, Recoverable };

struct FaultEvent {
  double time = 0;
  std::string device;
  FaultAction action = FaultAction::Fail;
  double recover_after = 30.0;  // seconds; only used by Recoverable
};

struct FaultScript {
  std::vector<FaultEvent> events;  // times nondecreasing
  std::uint64_t rng_seed = 0;
};

std::vector<std::string> validate_faults(const FaultScript& s, const DeviceFleet& fleet);

// How per-query sample successes are drawn. Both tie the ensemble-average
// single-sample success rate to the coverage law at S=1; LatentDifficulty
// additionally spreads difficulty across queries so that observed coverage
// curves follow the sublinear sample-scaling law instead of saturating.
enum class OutcomeModel { LatentDifficulty, Uniform };

struct SimOptions {
  std::uint64_t seed = 0;
  bool governor_on = true;
  OutcomeModel outcome_model = OutcomeModel::LatentDifficulty;
  double redistribution_delay = 0.05;  // seconds after failure detection
  double proactive_margin = 0.999;     // of steady-state throttle budget
  double hw_throttle_clock_factor = 0.5;
  HealthConfig health;
};

// Deterministic single-threaded event loop. Executes workload.n_queries
// queries, each S samples of T tokens, over the plan's device chain, with the
// thermal model, safety governor, and fault script in the loop. Identical
// inputs and seed yield identical reports.
SimReport simulate(const AllocationPlan& plan, const PlanRequest& req, const ThermalModel& thermal,
                   const ThermalPolicy& policy, const GuardrailPolicy& guardrails,
                   const FaultScript& faults, const SimOptions& opts);

// Per-query success probabilities under the chosen outcome model.
std::vector<double> sample_success_probs(const ScalingParams& params, double n_params,
                                         double tokens, int n_queries, OutcomeModel model,
                                         std::uint64_t seed);

// Bernoulli draws: outcomes[q][s] = success of sample s on query q.
std::vector<std::vector<std::uint8_t>> synthesize_outcomes(const std::vector<double>& probs,
                                                           int n_samples, std::uint64_t seed);

// Attach an externally produced outcome matrix to a report (dimension-checked).
void record_pass_outcomes(SimReport& report, std::vector<std::vector<std::uint8_t>> outcomes,
                          int n_samples);

// Observed any-success fraction of an outcome matrix.
double observed_coverage(const std::vector<std::vector<std::uint8_t>>& outcomes);

}  // namespace edgesim
