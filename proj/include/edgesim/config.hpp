#pragma once
#include <string>
#include <vector>

#include "edgesim/lawfit.hpp"
#include "edgesim/safety.hpp"
#include "edgesim/scaling.hpp"
#include "edgesim/sim.hpp"
#include "edgesim/thermal.hpp"
#include "edgesim/types.hpp"

// YAML configuration loaders and CSV emitters. Loaders throw ConfigError with
// a file/field-bearing message on malformed input; missing optional keys fall
// back to the documented defaults.

namespace edgesim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

DeviceFleet load_fleet(const std::string& path);
ModelSpec load_model(const std::string& path);
WorkloadSpec load_workload(const std::string& path);
ScalingParams load_params(const std::string& path);
CostParams load_cost(const std::string& path);
ThermalModel load_thermal(const std::string& path);
ThermalPolicy load_thermal_policy(const std::string& path);
GuardrailPolicy load_guardrails(const std::string& path);
HealthConfig load_health(const std::string& path);
FaultScript load_faults(const std::string& path);

// "preset:<name>" resolves to a built-in; anything else is a file path.
DeviceFleet resolve_fleet(const std::string& ref);
ModelSpec resolve_model(const std::string& ref);

// Coverage curve CSV: header `s,coverage[,weight]`, one point per row.
CoverageCurve load_curve_csv(const std::string& path);
std::string curve_to_csv(const CoverageCurve& curve);

// Trace CSV: header `time_s,device_id,value`, rows ordered by device then time.
std::string traces_to_csv(const std::map<std::string, std::vector<TracePoint>>& traces);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a truncated file.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace edgesim
