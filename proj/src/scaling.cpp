#include "edgesim/scaling.hpp"

#include <cmath>
#include <stdexcept>

namespace edgesim {

std::string to_string(RooflineClass c) {
  switch (c) {
    case RooflineClass::MemoryBound: return "memory_bound";
    case RooflineClass::ComputeBound: return "compute_bound";
    case RooflineClass::Balanced: return "balanced";
  }
  return "?";
}

std::vector<std::string> validate_params(const ScalingParams& p) {
  std::vector<std::string> out;
  if (!(p.beta_n > 0 && p.beta_n < 1)) out.push_back("beta_n must be in (0, 1)");
  if (!(p.beta_s > 0 && p.beta_s < 1)) out.push_back("beta_s must be in (0, 1)");
  if (!(p.gamma_e > 0 && p.gamma_e <= 1)) out.push_back("gamma_e must be in (0, 1]");
  if (!(p.gamma_util > 0 && p.gamma_util <= 1)) out.push_back("gamma_util must be in (0, 1]");
  for (const auto& [q, v] : p.f_q)
    if (!(v > 0 && v <= 1)) out.push_back("f_q[" + to_string(q) + "] must be in (0, 1]");
  if (!(p.b0 > 0)) out.push_back("b0 must be > 0");
  return out;
}

double coverage(const ScalingParams& p, double n_params, double n_samples, double tokens) {
  if (n_params < 1) throw std::invalid_argument("coverage: n_params must be >= 1");
  if (n_samples < 0) throw std::invalid_argument("coverage: n_samples must be >= 0");
  if (tokens < 1) throw std::invalid_argument("coverage: tokens must be >= 1");
  if (n_samples == 0) return 0.0;
  const double arg = p.alpha * std::pow(n_params, p.beta_n) * std::pow(n_samples, p.beta_s) *
                     std::pow(tokens, p.delta);
  const double c = 1.0 - std::exp(-arg);
  return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
}

static double quant_factor(const ScalingParams& p, Quantization q) {
  auto it = p.f_q.find(q);
  if (it == p.f_q.end())
    throw std::invalid_argument("no quantization factor configured for " + to_string(q));
  return it->second;
}

double energy(const ScalingParams& p, const DeviceSpec& device, double n_params,
              double n_samples, double tokens, Quantization quant) {
  if (n_params < 0 || n_samples < 0 || tokens < 0)
    throw std::invalid_argument("energy: counts must be >= 0");
  return p.c1 * std::pow(n_params, p.gamma_e) * quant_factor(p, quant) * device.power_peak *
         p.gamma_util * device.lambda * tokens * n_samples;
}

LatencyBreakdown latency(const ScalingParams& p, const DeviceSpec& device, const ModelSpec& model,
                         const WorkloadSpec& workload,
                         const std::vector<std::pair<double, double>>& io_transfers,
                         bool heterogeneous) {
  LatencyBreakdown b;
  const double ci = device.compute_rate();
  const double fpt = model.flops_per_token();
  b.prefill = static_cast<double>(workload.prompt_tokens) * fpt / ci;
  b.decode = static_cast<double>(workload.n_samples - 1) *
             static_cast<double>(workload.tokens_per_sample) * fpt /
             (ci * device.bandwidth / p.b0);
  for (const auto& [bytes, bw] : io_transfers) {
    if (!(bw > 0)) throw std::invalid_argument("latency: transfer with nonpositive bandwidth");
    b.io += bytes / bw;
  }
  if (heterogeneous) {
    const double l = std::log(static_cast<double>(workload.n_samples));
    const double scaled =
        p.overhead_log_base > 0 ? l / std::log(p.overhead_log_base) : l;
    b.overhead = p.overhead_const + p.overhead_alpha * scaled;
  }
  b.total = b.prefill + b.decode + b.io + b.overhead;
  return b;
}

CostBreakdown cost(const CostParams& cp, double energy_joules, double n_samples) {
  if (energy_joules < 0 || n_samples < 0)
    throw std::invalid_argument("cost: inputs must be >= 0");
  CostBreakdown b;
  b.amort = cp.hw_cost / cp.device_lifetime_ops * n_samples;
  b.energy_cost = energy_joules / 3.6e6 * cp.price_kwh;
  b.maint = cp.maint_const * n_samples;
  b.total = b.amort + b.energy_cost + b.maint;
  return b;
}

RooflineClass roofline_class(double intensity, const DeviceSpec& device, double epsilon) {
  if (intensity < 0) throw std::invalid_argument("roofline: intensity must be >= 0");
  const double ridge = device.compute_rate() / device.bandwidth;
  if (intensity < ridge * (1.0 - epsilon)) return RooflineClass::MemoryBound;
  if (intensity > ridge * (1.0 + epsilon)) return RooflineClass::ComputeBound;
  return RooflineClass::Balanced;
}

double calibrate_c1(const ScalingParams& p, const DeviceSpec& device, double n_params,
                    double n_samples, double tokens, Quantization quant, double target_joules) {
  ScalingParams unit = p;
  unit.c1 = 1.0;
  const double base = energy(unit, device, n_params, n_samples, tokens, quant);
  if (!(base > 0)) throw std::invalid_argument("calibrate_c1: degenerate configuration");
  return target_joules / base;
}

}  // namespace edgesim
