#pragma once
#include <string>
#include <vector>

#include "edgesim/scaling.hpp"
#include "edgesim/thermal.hpp"
#include "edgesim/types.hpp"

namespace edgesim::presets {

// The workstation-class fleet the shipped calibration is anchored to: one
// 8-core CPU, one low-power NPU, one discrete GPU and one integrated GPU.
DeviceFleet reference_fleet();

// Four nodes with identical compute rate and bandwidth but different power
// draw and efficiency multipliers. Useful for failover studies: losing a node
// changes capacity but not per-layer speed, so degradation bounds are tight.
DeviceFleet edge_cluster_fleet();

// A single discrete GPU in a poorly ventilated enclosure (high thermal
// resistance, slow time constant). Exercises the governor.
DeviceFleet thermal_stress_fleet();

ThermalModel reference_thermal();
ThermalModel thermal_stress_profile();

std::vector<std::string> model_names();
ModelSpec model(const std::string& name);  // throws std::invalid_argument

// Per-model calibrated law constants: the energy base coefficient is solved
// so a CPU-only run of the 125M model at S=20, T=100 reproduces the anchor
// measurement, and each model's coverage coefficient is solved from its
// observed 20-sample coverage. Sample exponents come from per-model fits.
ScalingParams params_for(const std::string& model_name);

// One query of 20 samples x 100 tokens with a 64-token prompt.
WorkloadSpec standard_workload();

CostParams reference_cost();

}  // namespace edgesim::presets
