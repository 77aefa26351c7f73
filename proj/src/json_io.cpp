#include "edgesim/json_io.hpp"

#include <sstream>

namespace edgesim {

using nlohmann::json;

void to_json(json& j, const DeviceSpec& d) {
  j = json{{"id", d.id},
           {"kind", to_string(d.kind)},
           {"vendor", d.vendor},
           {"mem_max", d.mem_max},
           {"bandwidth", d.bandwidth},
           {"frequency", d.frequency},
           {"power_peak", d.power_peak},
           {"n_cores", d.n_cores},
           {"lambda", d.lambda},
           {"t_max", d.t_max},
           {"t_ambient", d.t_ambient},
           {"priority", d.priority},
           {"interconnect_bw", d.interconnect_bw}};
}

void from_json(const json& j, DeviceSpec& d) {
  d.id = j.at("id").get<std::string>();
  d.kind = device_kind_from_string(j.at("kind").get<std::string>());
  d.vendor = j.value("vendor", std::string{});
  d.mem_max = j.at("mem_max").get<double>();
  d.bandwidth = j.at("bandwidth").get<double>();
  d.frequency = j.at("frequency").get<double>();
  d.power_peak = j.at("power_peak").get<double>();
  d.n_cores = j.at("n_cores").get<int>();
  d.lambda = j.at("lambda").get<double>();
  d.t_max = j.value("t_max", d.t_max);
  d.t_ambient = j.value("t_ambient", d.t_ambient);
  d.priority = j.value("priority", 0);
  d.interconnect_bw = j.value("interconnect_bw", d.interconnect_bw);
}

void to_json(json& j, const DeviceFleet& f) { j = json{{"devices", f.devices}}; }
void from_json(const json& j, DeviceFleet& f) {
  f.devices = j.at("devices").get<std::vector<DeviceSpec>>();
}

void to_json(json& j, const LayerSpec& l) {
  j = json{{"role", to_string(l.role)},
           {"index", l.index},
           {"mem_footprint", l.mem_footprint},
           {"flops_per_token", l.flops_per_token}};
}

void from_json(const json& j, LayerSpec& l) {
  l.role = layer_role_from_string(j.at("role").get<std::string>());
  l.index = j.value("index", 0);
  l.mem_footprint = j.at("mem_footprint").get<double>();
  l.flops_per_token = j.at("flops_per_token").get<double>();
}

void to_json(json& j, const ModelSpec& m) {
  j = json{{"name", m.name},
           {"n_params", m.n_params},
           {"layers", m.layers},
           {"flops_per_token_total", m.flops_per_token_total},
           {"precision", to_string(m.precision)},
           {"activation_overhead", m.activation_overhead},
           {"hidden_bytes_per_token", m.hidden_bytes_per_token}};
}

void from_json(const json& j, ModelSpec& m) {
  m.name = j.value("name", std::string{"unnamed"});
  m.n_params = j.at("n_params").get<double>();
  m.layers = j.at("layers").get<std::vector<LayerSpec>>();
  m.flops_per_token_total = j.value("flops_per_token_total", 0.0);
  m.precision = quantization_from_string(j.value("precision", std::string{"fp16"}));
  m.activation_overhead = j.value("activation_overhead", m.activation_overhead);
  m.hidden_bytes_per_token = j.value("hidden_bytes_per_token", m.hidden_bytes_per_token);
}

void to_json(json& j, const WorkloadSpec& w) {
  j = json{{"n_samples", w.n_samples},
           {"tokens_per_sample", w.tokens_per_sample},
           {"prompt_tokens", w.prompt_tokens},
           {"quantization", to_string(w.quantization)},
           {"n_queries", w.n_queries},
           {"latency_sla", w.latency_sla},
           {"coverage_min", w.coverage_min}};
}

void from_json(const json& j, WorkloadSpec& w) {
  w.n_samples = j.at("n_samples").get<int>();
  w.tokens_per_sample = j.at("tokens_per_sample").get<int>();
  w.prompt_tokens = j.value("prompt_tokens", 0);
  w.quantization = quantization_from_string(j.value("quantization", std::string{"fp16"}));
  w.n_queries = j.value("n_queries", 1);
  w.latency_sla = j.value("latency_sla", 0.0);
  w.coverage_min = j.value("coverage_min", 0.0);
}

void to_json(json& j, const ScalingParams& p) {
  json fq = json::object();
  for (const auto& [q, v] : p.f_q) fq[to_string(q)] = v;
  j = json{{"alpha", p.alpha},
           {"beta_n", p.beta_n},
           {"beta_s", p.beta_s},
           {"delta", p.delta},
           {"c1", p.c1},
           {"gamma_e", p.gamma_e},
           {"f_q", fq},
           {"gamma_util", p.gamma_util},
           {"overhead_const", p.overhead_const},
           {"overhead_alpha", p.overhead_alpha},
           {"overhead_log_base", p.overhead_log_base},
           {"b0", p.b0}};
}

void from_json(const json& j, ScalingParams& p) {
  ScalingParams def;
  p.alpha = j.value("alpha", def.alpha);
  p.beta_n = j.value("beta_n", def.beta_n);
  p.beta_s = j.value("beta_s", def.beta_s);
  p.delta = j.value("delta", def.delta);
  p.c1 = j.value("c1", def.c1);
  p.gamma_e = j.value("gamma_e", def.gamma_e);
  p.gamma_util = j.value("gamma_util", def.gamma_util);
  p.overhead_const = j.value("overhead_const", def.overhead_const);
  p.overhead_alpha = j.value("overhead_alpha", def.overhead_alpha);
  p.overhead_log_base = j.value("overhead_log_base", def.overhead_log_base);
  p.b0 = j.value("b0", def.b0);
  if (j.contains("f_q")) {
    p.f_q.clear();
    for (const auto& [k, v] : j.at("f_q").items())
      p.f_q[quantization_from_string(k)] = v.get<double>();
  }
}

void to_json(json& j, const CostParams& c) {
  j = json{{"hw_cost", c.hw_cost},
           {"device_lifetime_ops", c.device_lifetime_ops},
           {"price_kwh", c.price_kwh},
           {"maint_const", c.maint_const}};
}

void from_json(const json& j, CostParams& c) {
  CostParams def;
  c.hw_cost = j.value("hw_cost", def.hw_cost);
  c.device_lifetime_ops = j.value("device_lifetime_ops", def.device_lifetime_ops);
  c.price_kwh = j.value("price_kwh", def.price_kwh);
  c.maint_const = j.value("maint_const", def.maint_const);
}

void to_json(json& j, const DeviceThermal& t) {
  j = json{{"r_th", t.r_th}, {"tau_th", t.tau_th}, {"t_ambient", t.t_ambient}};
}

void from_json(const json& j, DeviceThermal& t) {
  DeviceThermal def;
  t.r_th = j.value("r_th", def.r_th);
  t.tau_th = j.value("tau_th", def.tau_th);
  t.t_ambient = j.value("t_ambient", def.t_ambient);
}

void to_json(json& j, const ThermalModel& t) {
  j = json{{"fallback", t.fallback}, {"devices", t.devices}};
}

void from_json(const json& j, ThermalModel& t) {
  if (j.contains("fallback")) t.fallback = j.at("fallback").get<DeviceThermal>();
  if (j.contains("devices"))
    t.devices = j.at("devices").get<std::map<std::string, DeviceThermal>>();
}

void to_json(json& j, const ThermalPolicy& p) {
  j = json{{"theta_throttle", p.theta_throttle},
           {"monitor_period_normal", p.monitor_period_normal},
           {"monitor_period_hot", p.monitor_period_hot},
           {"hot_threshold", p.hot_threshold}};
}

void from_json(const json& j, ThermalPolicy& p) {
  ThermalPolicy def;
  p.theta_throttle = j.value("theta_throttle", def.theta_throttle);
  p.monitor_period_normal = j.value("monitor_period_normal", def.monitor_period_normal);
  p.monitor_period_hot = j.value("monitor_period_hot", def.monitor_period_hot);
  p.hot_threshold = j.value("hot_threshold", def.hot_threshold);
}

void to_json(json& j, const GuardrailPolicy& p) {
  j = json{{"max_seq_len", p.max_seq_len},
           {"max_gen_factor", p.max_gen_factor},
           {"repetition_fraction", p.repetition_fraction},
           {"repetition_window", p.repetition_window},
           {"mem_budget_factor", p.mem_budget_factor},
           {"time_budget_factor", p.time_budget_factor},
           {"token_rate_limit", p.token_rate_limit}};
}

void from_json(const json& j, GuardrailPolicy& p) {
  GuardrailPolicy def;
  p.max_seq_len = j.value("max_seq_len", def.max_seq_len);
  p.max_gen_factor = j.value("max_gen_factor", def.max_gen_factor);
  p.repetition_fraction = j.value("repetition_fraction", def.repetition_fraction);
  p.repetition_window = j.value("repetition_window", def.repetition_window);
  p.mem_budget_factor = j.value("mem_budget_factor", def.mem_budget_factor);
  p.time_budget_factor = j.value("time_budget_factor", def.time_budget_factor);
  p.token_rate_limit = j.value("token_rate_limit", def.token_rate_limit);
}

void to_json(json& j, const HealthConfig& h) {
  j = json{{"window_size", h.window_size},
           {"error_rate_trip", h.error_rate_trip},
           {"timeout_factor", h.timeout_factor},
           {"heartbeat_interval", h.heartbeat_interval},
           {"heartbeat_misses", h.heartbeat_misses},
           {"reintro_start", h.reintro_start},
           {"ramp_duration", h.ramp_duration}};
}

void from_json(const json& j, HealthConfig& h) {
  HealthConfig def;
  h.window_size = j.value("window_size", def.window_size);
  h.error_rate_trip = j.value("error_rate_trip", def.error_rate_trip);
  h.timeout_factor = j.value("timeout_factor", def.timeout_factor);
  h.heartbeat_interval = j.value("heartbeat_interval", def.heartbeat_interval);
  h.heartbeat_misses = j.value("heartbeat_misses", def.heartbeat_misses);
  h.reintro_start = j.value("reintro_start", def.reintro_start);
  h.ramp_duration = j.value("ramp_duration", def.ramp_duration);
}

void to_json(json& j, const FaultEvent& e) {
  j = json{{"time", e.time},
           {"device", e.device},
           {"action", e.action == FaultAction::Fail ? "fail" : "recoverable"},
           {"recover_after", e.recover_after}};
}

void from_json(const json& j, FaultEvent& e) {
  e.time = j.at("time").get<double>();
  e.device = j.at("device").get<std::string>();
  const std::string action = j.value("action", std::string{"fail"});
  if (action == "fail")
    e.action = FaultAction::Fail;
  else if (action == "recoverable")
    e.action = FaultAction::Recoverable;
  else
    throw std::invalid_argument("unknown fault action: " + action);
  e.recover_after = j.value("recover_after", e.recover_after);
}

void to_json(json& j, const FaultScript& s) {
  j = json{{"seed", s.rng_seed}, {"events", s.events}};
}

void from_json(const json& j, FaultScript& s) {
  s.rng_seed = j.value("seed", std::uint64_t{0});
  if (j.contains("events")) s.events = j.at("events").get<std::vector<FaultEvent>>();
}

namespace {
json breakdown_json(const LatencyBreakdown& l) {
  return json{{"prefill", l.prefill},
              {"decode", l.decode},
              {"io", l.io},
              {"overhead", l.overhead},
              {"total", l.total}};
}
}  // namespace

json plan_to_json(const AllocationPlan& plan, const ModelSpec& model,
                  const PlanDiagnostics* diag) {
  json assignment = json::array();
  const auto inv = layer_inventory(model);
  for (size_t i = 0; i < plan.assignment.size() && i < inv.size(); ++i) {
    assignment.push_back(json{{"layer", to_string(inv[i].role)},
                              {"index", inv[i].index},
                              {"device", plan.assignment[i]}});
  }
  json j{{"status", to_string(plan.safety_status)},
         {"assignment", assignment},
         {"predicted", json{{"energy_joules", plan.predicted_energy},
                            {"latency_seconds", plan.predicted_latency},
                            {"power_watts", plan.predicted_power}}},
         {"per_device_mem", plan.per_device_mem}};
  if (diag) {
    json ranking = json::array();
    for (const auto& [id, eff] : diag->device_ranking)
      ranking.push_back(json{{"device", id}, {"flops_per_joule", eff}});
    json constraints = json::array();
    for (const auto& c : diag->constraint_report)
      constraints.push_back(json{{"name", c.name}, {"satisfied", c.satisfied}, {"slack", c.slack}});
    j["diagnostics"] = json{{"device_ranking", ranking},
                            {"max_layers_per_device", diag->max_layers_per_device},
                            {"constraints", constraints},
                            {"notes", diag->notes}};
  }
  return j;
}

json report_to_json(const SimReport& r) {
  json events = json::array();
  for (const auto& e : r.events)
    events.push_back(json{{"time", e.time}, {"device", e.device}, {"kind", e.kind},
                          {"detail", e.detail}});
  return json{{"energy",
               json{{"prefill", r.energy_prefill},
                    {"decode", r.energy_decode},
                    {"overhead", r.energy_overhead},
                    {"total", r.total_energy}}},
              {"latency", breakdown_json(r.latency_sum)},
              {"query_latency", r.query_latency},
              {"query_start", r.query_start},
              {"makespan", r.makespan},
              {"avg_power", r.avg_power},
              {"queries",
               json{{"submitted", r.queries_submitted},
                    {"completed", r.queries_completed},
                    {"lost", r.queries_lost}}},
              {"utilization", r.utilization},
              {"throttle_event_count", r.throttle_event_count},
              {"threshold_crossings", r.threshold_crossings},
              {"events", events}};
}

json fit_to_json(const FitResult& f) {
  json j{{"alpha_hat", f.alpha_hat},
         {"beta_hat", f.beta_hat},
         {"r_squared", f.r_squared},
         {"converged", f.converged},
         {"iterations", f.iterations},
         {"points_used", f.points_used},
         {"n_bootstrap", f.n_bootstrap}};
  if (f.ci_95)
    j["ci_95"] = json::array({f.ci_95->first, f.ci_95->second});
  else
    j["ci_95"] = nullptr;
  return j;
}

json metrics_to_json(const MetricSet& m) {
  json j{{"schema_version", 1},
         {"ipw", m.ipw},
         {"ece", m.ece},
         {"ppp", m.ppp},
         {"energy_per_token", m.energy_per_token},
         {"throughput", m.throughput}};
  for (const auto& [k, v] : m.pass_at_k) j["pass_at_" + std::to_string(k)] = v;
  return j;
}

std::string events_to_jsonl(const std::vector<SafetyEvent>& events) {
  std::ostringstream out;
  for (const auto& e : events) {
    out << json{{"time", e.time}, {"device", e.device}, {"kind", e.kind}, {"detail", e.detail}}
               .dump()
        << "\n";
  }
  return out.str();
}

std::string fit_summary(const std::string& label, const FitResult& fit) {
  std::ostringstream out;
  out.precision(3);
  out << std::fixed << label << "  beta = " << fit.beta_hat << "  95% CI ";
  if (fit.ci_95)
    out << "[" << fit.ci_95->first << ", " << fit.ci_95->second << "]";
  else
    out << "[unavailable]";
  out << "  R^2 = " << fit.r_squared;
  if (!fit.converged) out << "  (not converged)";
  return out.str();
}

}  // namespace edgesim
