#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgesim {

enum class DeviceKind { CPU, GPU, NPU };
enum class Quantization { FP16, FP8 };
enum class LayerRole { Embedding, Decoder, LMHead };
enum class SafetyStatus { OK, ThrottleRisk, Infeasible };

std::string to_string(DeviceKind k);
std::string to_string(Quantization q);
std::string to_string(LayerRole r);
std::string to_string(SafetyStatus s);
DeviceKind device_kind_from_string(const std::string& s);
Quantization quantization_from_string(const std::string& s);
LayerRole layer_role_from_string(const std::string& s);

inline double bytes_per_param(Quantization q) { return q == Quantization::FP16 ? 2.0 : 1.0; }

// Capability vector of one accelerator or host.
struct DeviceSpec {
  std::string id;
  DeviceKind kind = DeviceKind::CPU;
  std::string vendor;
  double mem_max = 0;         // bytes
  double bandwidth = 0;       // bytes/s, device-local memory bandwidth
  double frequency = 0;       // Hz
  double power_peak = 0;      // watts
  int n_cores = 1;
  double lambda = 1.0;        // device energy multiplier, 1.0 = host baseline
  double t_max = 100.0;       // deg C, hardware throttle point
  double t_ambient = 25.0;    // deg C
  int priority = 0;           // lower wins ties
  double interconnect_bw = 32e9;  // bytes/s to any peer (PCIe-class default)

  double compute_rate() const { return 2.0 * frequency * static_cast<double>(n_cores); }
  double efficiency() const { return compute_rate() / power_peak; }  // FLOPs per joule
};

struct DeviceFleet {
  std::vector<DeviceSpec> devices;

  const DeviceSpec* find(const std::string& id) const {
    for (const auto& d : devices)
      if (d.id == id) return &d;
    return nullptr;
  }
  const DeviceSpec& at(const std::string& id) const {
    const DeviceSpec* d = find(id);
    if (!d) throw std::out_of_range("unknown device id: " + id);
    return *d;
  }
};

struct LayerSpec {
  LayerRole role = LayerRole::Decoder;
  int index = 0;              // position among decoders; 0 for embedding/head
  double mem_footprint = 0;   // bytes, weights plus activation overhead
  double flops_per_token = 0;
};

struct ModelSpec {
  std::string name;
  double n_params = 0;
  std::vector<LayerSpec> layers;
  double flops_per_token_total = 0;  // defaults to 2 * n_params when 0
  Quantization precision = Quantization::FP16;
  double activation_overhead = 0.1;      // fraction of weight bytes
  double hidden_bytes_per_token = 0;     // inter-layer activation size

  double flops_per_token() const {
    return flops_per_token_total > 0 ? flops_per_token_total : 2.0 * n_params;
  }
  double total_bytes() const {
    double s = 0;
    for (const auto& l : layers) s += l.mem_footprint;
    return s;
  }
};

struct WorkloadSpec {
  int n_samples = 1;          // S
  int tokens_per_sample = 1;  // T
  int prompt_tokens = 0;
  Quantization quantization = Quantization::FP16;
  int n_queries = 1;
  double latency_sla = 0;     // seconds; <= 0 disables the constraint
  double coverage_min = 0;    // fraction
};

// Layer-to-device assignment plus the planner's predictions for it.
struct AllocationPlan {
  // device id per layer, aligned with layer_inventory() order
  std::vector<std::string> assignment;
  double predicted_energy = 0;   // joules
  double predicted_latency = 0;  // seconds
  double predicted_power = 0;    // watts
  std::map<std::string, double> per_device_mem;  // bytes
  SafetyStatus safety_status = SafetyStatus::OK;
};

// Violations are data, not exceptions: empty means valid.
std::vector<std::string> validate_fleet(const DeviceFleet& fleet);
std::vector<std::string> validate_model(const ModelSpec& model);
std::vector<std::string> validate_workload(const WorkloadSpec& w);

// Canonical layer order: embedding, decoders by index, head.
// Throws std::invalid_argument on structurally broken models.
std::vector<LayerSpec> layer_inventory(const ModelSpec& model);

}  // namespace edgesim
