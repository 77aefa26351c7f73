#pragma once
#include <nlohmann/json.hpp>

#include "edgesim/lawfit.hpp"
#include "edgesim/metrics.hpp"
#include "edgesim/planner.hpp"
#include "edgesim/report.hpp"
#include "edgesim/safety.hpp"
#include "edgesim/scaling.hpp"
#include "edgesim/sim.hpp"
#include "edgesim/thermal.hpp"
#include "edgesim/types.hpp"

// JSON bindings. Configuration types round-trip (to_json/from_json pairs);
// result types (plans, reports, fits, metrics) serialize one way.

namespace edgesim {

void to_json(nlohmann::json& j, const DeviceSpec& d);
void from_json(const nlohmann::json& j, DeviceSpec& d);
void to_json(nlohmann::json& j, const DeviceFleet& f);
void from_json(const nlohmann::json& j, DeviceFleet& f);
void to_json(nlohmann::json& j, const LayerSpec& l);
void from_json(const nlohmann::json& j, LayerSpec& l);
void to_json(nlohmann::json& j, const ModelSpec& m);
void from_json(const nlohmann::json& j, ModelSpec& m);
void to_json(nlohmann::json& j, const WorkloadSpec& w);
void from_json(const nlohmann::json& j, WorkloadSpec& w);
void to_json(nlohmann::json& j, const ScalingParams& p);
void from_json(const nlohmann::json& j, ScalingParams& p);
void to_json(nlohmann::json& j, const CostParams& c);
void from_json(const nlohmann::json& j, CostParams& c);
void to_json(nlohmann::json& j, const DeviceThermal& t);
void from_json(const nlohmann::json& j, DeviceThermal& t);
void to_json(nlohmann::json& j, const ThermalModel& t);
void from_json(const nlohmann::json& j, ThermalModel& t);
void to_json(nlohmann::json& j, const ThermalPolicy& p);
void from_json(const nlohmann::json& j, ThermalPolicy& p);
void to_json(nlohmann::json& j, const GuardrailPolicy& p);
void from_json(const nlohmann::json& j, GuardrailPolicy& p);
void to_json(nlohmann::json& j, const HealthConfig& h);
void from_json(const nlohmann::json& j, HealthConfig& h);
void to_json(nlohmann::json& j, const FaultEvent& e);
void from_json(const nlohmann::json& j, FaultEvent& e);
void to_json(nlohmann::json& j, const FaultScript& s);
void from_json(const nlohmann::json& j, FaultScript& s);

nlohmann::json plan_to_json(const AllocationPlan& plan, const ModelSpec& model,
                            const PlanDiagnostics* diag = nullptr);
nlohmann::json report_to_json(const SimReport& report);
nlohmann::json fit_to_json(const FitResult& fit);
nlohmann::json metrics_to_json(const MetricSet& metrics);  // flat, schema-versioned

// One JSON object per line: time, device, kind, detail.
std::string events_to_jsonl(const std::vector<SafetyEvent>& events);

// Table-style one-line rendering of a fit: label, beta, CI, R^2.
std::string fit_summary(const std::string& label, const FitResult& fit);

}  // namespace edgesim
