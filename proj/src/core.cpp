#include "edgesim/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace edgesim {

std::string to_string(DeviceKind k) {
  switch (k) {
    case DeviceKind::CPU: return "cpu";
    case DeviceKind::GPU: return "gpu";
    case DeviceKind::NPU: return "npu";
  }
  return "?";
}

std::string to_string(Quantization q) { return q == Quantization::FP16 ? "fp16" : "fp8"; }

std::string to_string(LayerRole r) {
  switch (r) {
    case LayerRole::Embedding: return "embedding";
    case LayerRole::Decoder: return "decoder";
    case LayerRole::LMHead: return "lm_head";
  }
  return "?";
}

std::string to_string(SafetyStatus s) {
  switch (s) {
    case SafetyStatus::OK: return "ok";
    case SafetyStatus::ThrottleRisk: return "throttle_risk";
    case SafetyStatus::Infeasible: return "infeasible";
  }
  return "?";
}

DeviceKind device_kind_from_string(const std::string& s) {
  if (s == "cpu" || s == "CPU") return DeviceKind::CPU;
  if (s == "gpu" || s == "GPU") return DeviceKind::GPU;
  if (s == "npu" || s == "NPU") return DeviceKind::NPU;
  throw std::invalid_argument("unknown device kind: " + s);
}

Quantization quantization_from_string(const std::string& s) {
  if (s == "fp16" || s == "FP16") return Quantization::FP16;
  if (s == "fp8" || s == "FP8") return Quantization::FP8;
  throw std::invalid_argument("unknown quantization: " + s);
}

LayerRole layer_role_from_string(const std::string& s) {
  if (s == "embedding") return LayerRole::Embedding;
  if (s == "decoder") return LayerRole::Decoder;
  if (s == "lm_head") return LayerRole::LMHead;
  throw std::invalid_argument("unknown layer role: " + s);
}

std::vector<std::string> validate_fleet(const DeviceFleet& fleet) {
  std::vector<std::string> out;
  if (fleet.devices.empty()) {
    out.push_back("fleet has no devices");
    return out;
  }
  std::set<std::string> ids;
  for (const auto& d : fleet.devices) {
    auto bad = [&](const std::string& what) { out.push_back(d.id + ": " + what); };
    if (!ids.insert(d.id).second) bad("duplicate device id");
    if (!(d.mem_max > 0)) bad("mem_max must be > 0");
    if (!(d.bandwidth > 0)) bad("bandwidth must be > 0");
    if (!(d.frequency > 0)) bad("frequency must be > 0");
    if (!(d.power_peak > 0)) bad("power_peak must be > 0");
    if (d.n_cores < 1) bad("n_cores must be >= 1");
    if (!(d.lambda > 0) || d.lambda > 1.0) bad("lambda must be in (0, 1]");
    if (!(d.interconnect_bw > 0)) bad("interconnect_bw must be > 0");
    if (!(d.t_max > 0)) bad("t_max must be > 0");
    if (!(d.t_ambient < 0.85 * d.t_max)) bad("ambient >= throttle threshold");
  }
  return out;
}

std::vector<std::string> validate_model(const ModelSpec& model) {
  std::vector<std::string> out;
  if (!(model.n_params > 0)) out.push_back("n_params must be > 0");
  bool emb = false, head = false;
  std::vector<int> dec;
  for (const auto& l : model.layers) {
    if (!(l.mem_footprint > 0))
      out.push_back("layer with nonpositive mem_footprint (role " + to_string(l.role) + ")");
    if (l.role == LayerRole::Embedding) emb = true;
    if (l.role == LayerRole::LMHead) head = true;
    if (l.role == LayerRole::Decoder) dec.push_back(l.index);
  }
  if (!emb) out.push_back("missing embedding layer");
  if (!head) out.push_back("missing lm_head layer");
  std::sort(dec.begin(), dec.end());
  for (size_t i = 0; i < dec.size(); ++i)
    if (dec[i] != static_cast<int>(i)) {
      out.push_back("decoder indices not contiguous from 0");
      break;
    }
  // Footprint sanity: declared bytes should track parameter count for the
  // declared precision, after stripping the activation overhead.
  if (model.n_params > 0 && !model.layers.empty()) {
    const double weight_bytes = model.total_bytes() / (1.0 + model.activation_overhead);
    const double expect = model.n_params * bytes_per_param(model.precision);
    const double rel = std::abs(weight_bytes - expect) / expect;
    if (rel > 0.10) {
      std::ostringstream os;
      os << "layer footprints inconsistent with n_params at " << to_string(model.precision)
         << " (off by " << rel * 100.0 << "%)";
      out.push_back(os.str());
    }
  }
  return out;
}

std::vector<std::string> validate_workload(const WorkloadSpec& w) {
  std::vector<std::string> out;
  if (w.n_samples < 1) out.push_back("n_samples must be >= 1");
  if (w.tokens_per_sample < 1) out.push_back("tokens_per_sample must be >= 1");
  if (w.prompt_tokens < 0) out.push_back("prompt_tokens must be >= 0");
  if (w.n_queries < 0) out.push_back("n_queries must be >= 0");
  if (w.coverage_min < 0 || w.coverage_min > 1) out.push_back("coverage_min must be in [0, 1]");
  return out;
}

std::vector<LayerSpec> layer_inventory(const ModelSpec& model) {
  const LayerSpec* emb = nullptr;
  const LayerSpec* head = nullptr;
  std::vector<LayerSpec> dec;
  for (const auto& l : model.layers) {
    switch (l.role) {
      case LayerRole::Embedding:
        if (emb) throw std::invalid_argument("model has two embedding layers");
        emb = &l;
        break;
      case LayerRole::LMHead:
        if (head) throw std::invalid_argument("model has two lm_head layers");
        head = &l;
        break;
      case LayerRole::Decoder:
        dec.push_back(l);
        break;
    }
  }
  if (!emb || !head) throw std::invalid_argument("model must declare embedding and lm_head");
  std::sort(dec.begin(), dec.end(),
            [](const LayerSpec& a, const LayerSpec& b) { return a.index < b.index; });
  std::vector<LayerSpec> out;
  out.reserve(dec.size() + 2);
  out.push_back(*emb);
  for (const auto& l : dec) out.push_back(l);
  out.push_back(*head);
  return out;
}

}  // namespace edgesim
