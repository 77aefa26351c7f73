#pragma once
#include <map>
#include <utility>
#include <vector>

#include "edgesim/types.hpp"

namespace edgesim {

// Constants of the closed-form performance model. Defaults follow the shipped
// calibration (see presets.hpp for values tied to the built-in fleet).
struct ScalingParams {
  double alpha = 1e-4;    // coverage coefficient
  double beta_n = 0.70;   // coverage exponent on parameter count
  double beta_s = 0.70;   // coverage exponent on samples
  double delta = 0.20;    // coverage exponent on tokens
  double c1 = 1.0;        // energy base coefficient (calibrate_c1 sets it)
  double gamma_e = 0.90;  // energy exponent on parameter count
  std::map<Quantization, double> f_q = {{Quantization::FP16, 1.0}, {Quantization::FP8, 0.65}};
  double gamma_util = 0.75;       // sustained utilization fraction
  double overhead_const = 0.0;    // seconds, cross-device scheduling fixed cost
  double overhead_alpha = 0.0;    // seconds per log(samples)
  double overhead_log_base = 0.0; // 0 means natural log
  double b0 = 100e9;              // bytes/s, decode bandwidth baseline
};

struct CostParams {
  double hw_cost = 0;              // currency per device
  double device_lifetime_ops = 1e9;
  double price_kwh = 0.20;         // currency per kWh
  double maint_const = 0;          // currency per sample per device
};

struct LatencyBreakdown {
  double prefill = 0, decode = 0, io = 0, overhead = 0, total = 0;
};

struct CostBreakdown {
  double amort = 0, energy_cost = 0, maint = 0, total = 0;
};

enum class RooflineClass { MemoryBound, ComputeBound, Balanced };
std::string to_string(RooflineClass c);

std::vector<std::string> validate_params(const ScalingParams& p);

// Fraction of queries solved by at least one of S samples.
double coverage(const ScalingParams& p, double n_params, double n_samples, double tokens);

// Whole-run energy on a single device, joules.
double energy(const ScalingParams& p, const DeviceSpec& device, double n_params,
              double n_samples, double tokens, Quantization quant);

// Phase-decomposed latency for a run held entirely on `device`, plus explicit
// transfer legs. `heterogeneous` switches the scheduling-overhead term on.
LatencyBreakdown latency(const ScalingParams& p, const DeviceSpec& device, const ModelSpec& model,
                         const WorkloadSpec& workload,
                         const std::vector<std::pair<double, double>>& io_transfers,
                         bool heterogeneous);

CostBreakdown cost(const CostParams& cp, double energy_joules, double n_samples);

RooflineClass roofline_class(double intensity, const DeviceSpec& device, double epsilon = 0.05);

// Solves for c1 such that energy() reproduces `target_joules` for the given
// configuration. The base coefficient is never hand-tuned; it is always
// derived from a declared anchor measurement.
double calibrate_c1(const ScalingParams& p, const DeviceSpec& device, double n_params,
                    double n_samples, double tokens, Quantization quant, double target_joules);

}  // namespace edgesim
