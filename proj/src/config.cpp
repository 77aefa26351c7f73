#include "edgesim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edgesim/presets.hpp"

namespace edgesim {

namespace {

YAML::Node load_document(const std::string& path) {
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot open file");
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

template <typename T>
T req(const YAML::Node& n, const std::string& field, const std::string& ctx) {
  if (!n[field]) throw ConfigError(ctx + ": missing required field '" + field + "'");
  try {
    return n[field].template as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(ctx + ": field '" + field + "' has the wrong type");
  }
}

template <typename T>
T opt(const YAML::Node& n, const std::string& field, T def, const std::string& ctx) {
  if (!n[field]) return def;
  try {
    return n[field].template as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(ctx + ": field '" + field + "' has the wrong type");
  }
}

}  // namespace

DeviceFleet load_fleet(const std::string& path) {
  const YAML::Node doc = load_document(path);
  if (!doc["devices"] || !doc["devices"].IsSequence())
    throw ConfigError(path + ": expected a 'devices' sequence");
  DeviceFleet fleet;
  int i = 0;
  for (const auto& n : doc["devices"]) {
    const std::string ctx = path + ": devices[" + std::to_string(i) + "]";
    DeviceSpec d;
    d.id = req<std::string>(n, "id", ctx);
    try {
      d.kind = device_kind_from_string(req<std::string>(n, "kind", ctx));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    d.vendor = opt<std::string>(n, "vendor", "", ctx);
    d.mem_max = req<double>(n, "mem_max", ctx);
    d.bandwidth = req<double>(n, "bandwidth", ctx);
    d.frequency = req<double>(n, "frequency", ctx);
    d.power_peak = req<double>(n, "power_peak", ctx);
    d.n_cores = req<int>(n, "n_cores", ctx);
    d.lambda = req<double>(n, "lambda", ctx);
    d.t_max = opt<double>(n, "t_max", d.t_max, ctx);
    d.t_ambient = opt<double>(n, "t_ambient", d.t_ambient, ctx);
    d.priority = opt<int>(n, "priority", i, ctx);
    d.interconnect_bw = opt<double>(n, "interconnect_bw", d.interconnect_bw, ctx);
    fleet.devices.push_back(std::move(d));
    ++i;
  }
  return fleet;
}

ModelSpec load_model(const std::string& path) {
  const YAML::Node doc = load_document(path);
  ModelSpec m;
  m.name = opt<std::string>(doc, "name", "unnamed", path);
  m.n_params = req<double>(doc, "n_params", path);
  try {
    m.precision = quantization_from_string(opt<std::string>(doc, "precision", "fp16", path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  m.activation_overhead = opt<double>(doc, "activation_overhead", m.activation_overhead, path);
  m.hidden_bytes_per_token =
      opt<double>(doc, "hidden_bytes_per_token", m.hidden_bytes_per_token, path);
  m.flops_per_token_total = opt<double>(doc, "flops_per_token_total", 0.0, path);
  if (!doc["layers"] || !doc["layers"].IsSequence())
    throw ConfigError(path + ": expected a 'layers' sequence");
  int i = 0;
  for (const auto& n : doc["layers"]) {
    const std::string ctx = path + ": layers[" + std::to_string(i) + "]";
    LayerSpec l;
    try {
      l.role = layer_role_from_string(req<std::string>(n, "role", ctx));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
    l.index = opt<int>(n, "index", 0, ctx);
    l.mem_footprint = req<double>(n, "mem_footprint", ctx);
    l.flops_per_token = req<double>(n, "flops_per_token", ctx);
    m.layers.push_back(l);
    ++i;
  }
  return m;
}

WorkloadSpec load_workload(const std::string& path) {
  const YAML::Node doc = load_document(path);
  WorkloadSpec w;
  w.n_samples = req<int>(doc, "n_samples", path);
  w.tokens_per_sample = req<int>(doc, "tokens_per_sample", path);
  w.prompt_tokens = opt<int>(doc, "prompt_tokens", 0, path);
  try {
    w.quantization = quantization_from_string(opt<std::string>(doc, "quantization", "fp16", path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  w.n_queries = opt<int>(doc, "n_queries", 1, path);
  w.latency_sla = opt<double>(doc, "latency_sla", 0.0, path);
  w.coverage_min = opt<double>(doc, "coverage_min", 0.0, path);
  return w;
}

ScalingParams load_params(const std::string& path) {
  const YAML::Node doc = load_document(path);
  ScalingParams p;
  p.alpha = opt<double>(doc, "alpha", p.alpha, path);
  p.beta_n = opt<double>(doc, "beta_n", p.beta_n, path);
  p.beta_s = opt<double>(doc, "beta_s", p.beta_s, path);
  p.delta = opt<double>(doc, "delta", p.delta, path);
  p.c1 = opt<double>(doc, "c1", p.c1, path);
  p.gamma_e = opt<double>(doc, "gamma_e", p.gamma_e, path);
  p.gamma_util = opt<double>(doc, "gamma_util", p.gamma_util, path);
  p.overhead_const = opt<double>(doc, "overhead_const", p.overhead_const, path);
  p.overhead_alpha = opt<double>(doc, "overhead_alpha", p.overhead_alpha, path);
  p.overhead_log_base = opt<double>(doc, "overhead_log_base", p.overhead_log_base, path);
  p.b0 = opt<double>(doc, "b0", p.b0, path);
  if (doc["f_q"]) {
    if (!doc["f_q"].IsMap()) throw ConfigError(path + ": 'f_q' must be a map");
    p.f_q.clear();
    for (const auto& kv : doc["f_q"]) {
      try {
        p.f_q[quantization_from_string(kv.first.as<std::string>())] = kv.second.as<double>();
      } catch (const std::exception& e) {
        throw ConfigError(path + ": f_q: " + e.what());
      }
    }
  }
  return p;
}

CostParams load_cost(const std::string& path) {
  const YAML::Node doc = load_document(path);
  CostParams c;
  c.hw_cost = opt<double>(doc, "hw_cost", c.hw_cost, path);
  c.device_lifetime_ops = opt<double>(doc, "device_lifetime_ops", c.device_lifetime_ops, path);
  c.price_kwh = opt<double>(doc, "price_kwh", c.price_kwh, path);
  c.maint_const = opt<double>(doc, "maint_const", c.maint_const, path);
  return c;
}

namespace {
DeviceThermal parse_thermal(const YAML::Node& n, const std::string& ctx) {
  DeviceThermal d;
  d.r_th = opt<double>(n, "r_th", d.r_th, ctx);
  d.tau_th = opt<double>(n, "tau_th", d.tau_th, ctx);
  d.t_ambient = opt<double>(n, "t_ambient", d.t_ambient, ctx);
  return d;
}
}  // namespace

ThermalModel load_thermal(const std::string& path) {
  const YAML::Node doc = load_document(path);
  ThermalModel m;
  if (doc["fallback"]) m.fallback = parse_thermal(doc["fallback"], path + ": fallback");
  if (doc["devices"]) {
    if (!doc["devices"].IsMap()) throw ConfigError(path + ": 'devices' must be a map");
    for (const auto& kv : doc["devices"]) {
      const std::string id = kv.first.as<std::string>();
      m.devices[id] = parse_thermal(kv.second, path + ": devices." + id);
    }
  }
  return m;
}

ThermalPolicy load_thermal_policy(const std::string& path) {
  const YAML::Node doc = load_document(path);
  ThermalPolicy p;
  p.theta_throttle = opt<double>(doc, "theta_throttle", p.theta_throttle, path);
  p.monitor_period_normal = opt<double>(doc, "monitor_period_normal", p.monitor_period_normal, path);
  p.monitor_period_hot = opt<double>(doc, "monitor_period_hot", p.monitor_period_hot, path);
  p.hot_threshold = opt<double>(doc, "hot_threshold", p.hot_threshold, path);
  return p;
}

GuardrailPolicy load_guardrails(const std::string& path) {
  const YAML::Node doc = load_document(path);
  GuardrailPolicy p;
  p.max_seq_len = opt<int>(doc, "max_seq_len", p.max_seq_len, path);
  p.max_gen_factor = opt<double>(doc, "max_gen_factor", p.max_gen_factor, path);
  p.repetition_fraction = opt<double>(doc, "repetition_fraction", p.repetition_fraction, path);
  p.repetition_window = opt<int>(doc, "repetition_window", p.repetition_window, path);
  p.mem_budget_factor = opt<double>(doc, "mem_budget_factor", p.mem_budget_factor, path);
  p.time_budget_factor = opt<double>(doc, "time_budget_factor", p.time_budget_factor, path);
  p.token_rate_limit = opt<double>(doc, "token_rate_limit", p.token_rate_limit, path);
  return p;
}

HealthConfig load_health(const std::string& path) {
  const YAML::Node doc = load_document(path);
  HealthConfig h;
  h.window_size = opt<int>(doc, "window_size", h.window_size, path);
  h.error_rate_trip = opt<double>(doc, "error_rate_trip", h.error_rate_trip, path);
  h.timeout_factor = opt<double>(doc, "timeout_factor", h.timeout_factor, path);
  h.heartbeat_interval = opt<double>(doc, "heartbeat_interval", h.heartbeat_interval, path);
  h.heartbeat_misses = opt<int>(doc, "heartbeat_misses", h.heartbeat_misses, path);
  h.reintro_start = opt<double>(doc, "reintro_start", h.reintro_start, path);
  h.ramp_duration = opt<double>(doc, "ramp_duration", h.ramp_duration, path);
  return h;
}

FaultScript load_faults(const std::string& path) {
  const YAML::Node doc = load_document(path);
  FaultScript s;
  s.rng_seed = opt<std::uint64_t>(doc, "seed", 0, path);
  if (doc["events"]) {
    if (!doc["events"].IsSequence()) throw ConfigError(path + ": 'events' must be a sequence");
    int i = 0;
    for (const auto& n : doc["events"]) {
      const std::string ctx = path + ": events[" + std::to_string(i) + "]";
      FaultEvent e;
      e.time = req<double>(n, "time", ctx);
      e.device = req<std::string>(n, "device", ctx);
      const std::string action = opt<std::string>(n, "action", "fail", ctx);
      if (action == "fail")
        e.action = FaultAction::Fail;
      else if (action == "recoverable")
        e.action = FaultAction::Recoverable;
      else
        throw ConfigError(ctx + ": unknown action '" + action + "'");
      e.recover_after = opt<double>(n, "recover_after", e.recover_after, ctx);
      s.events.push_back(std::move(e));
      ++i;
    }
  }
  return s;
}

namespace {
constexpr const char* kPresetPrefix = "preset:";

bool is_preset(const std::string& ref, std::string& name) {
  if (ref.rfind(kPresetPrefix, 0) != 0) return false;
  name = ref.substr(7);
  return true;
}
}  // namespace

DeviceFleet resolve_fleet(const std::string& ref) {
  std::string name;
  if (!is_preset(ref, name)) return load_fleet(ref);
  if (name == "reference") return presets::reference_fleet();
  if (name == "edge-cluster") return presets::edge_cluster_fleet();
  if (name == "thermal-stress") return presets::thermal_stress_fleet();
  throw ConfigError("unknown fleet preset '" + name +
                    "' (expected reference, edge-cluster or thermal-stress)");
}

ModelSpec resolve_model(const std::string& ref) {
  std::string name;
  if (!is_preset(ref, name)) return load_model(ref);
  try {
    return presets::model(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

CoverageCurve load_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  CoverageCurve curve;
  curve.label = std::filesystem::path(path).stem().string();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string s_field, c_field;
    if (!std::getline(ss, s_field, ',') || !std::getline(ss, c_field, ','))
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 's,coverage' row");
    try {
      curve.points.emplace_back(std::stod(s_field), std::stod(c_field));
    } catch (const std::exception&) {
      if (lineno == 1) continue;  // header row
      throw ConfigError(path + ":" + std::to_string(lineno) + ": non-numeric row");
    }
  }
  return curve;
}

std::string curve_to_csv(const CoverageCurve& curve) {
  std::ostringstream out;
  out << "s,coverage\n";
  out.precision(17);
  for (const auto& [s, c] : curve.points) out << s << "," << c << "\n";
  return out.str();
}

std::string traces_to_csv(const std::map<std::string, std::vector<TracePoint>>& traces) {
  std::ostringstream out;
  out << "time_s,device_id,value\n";
  out.precision(17);
  for (const auto& [id, points] : traces)
    for (const auto& p : points) out << p.time << "," << id << "," << p.value << "\n";
  return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) throw ConfigError(path + ": cannot create parent directory: " + ec.message());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(tmp + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError(tmp + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError(path + ": atomic rename failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace edgesim
