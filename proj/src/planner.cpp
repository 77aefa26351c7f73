#include "edgesim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace edgesim {

namespace {

constexpr double kThermalExclusionTheta = 0.85;  // of t_max, pre-check cutoff
constexpr double kHotZoneTheta = 0.70;           // of t_max, throttle-risk flag

double device_temp(const PlanRequest& req, const DeviceSpec& d) {
  auto it = req.thermal_state.find(d.id);
  return it != req.thermal_state.end() ? it->second : d.t_ambient;
}

bool thermally_excluded(const PlanRequest& req, const DeviceSpec& d) {
  return device_temp(req, d) > kThermalExclusionTheta * d.t_max;
}

// Tokens carried across a device boundary: the prompt once, then every
// generated token of every sample.
double boundary_tokens(const WorkloadSpec& w) {
  return static_cast<double>(w.prompt_tokens) +
         static_cast<double>(w.n_samples) * static_cast<double>(w.tokens_per_sample);
}

double hop_bandwidth(const DeviceSpec& a, const DeviceSpec& b) {
  return std::min(a.interconnect_bw, b.interconnect_bw);
}

}  // namespace

std::vector<std::pair<std::string, double>> rank_devices(const DeviceFleet& fleet) {
  std::vector<const DeviceSpec*> ds;
  for (const auto& d : fleet.devices) ds.push_back(&d);
  std::stable_sort(ds.begin(), ds.end(), [](const DeviceSpec* a, const DeviceSpec* b) {
    const double ea = a->efficiency(), eb = b->efficiency();
    if (ea != eb) return ea > eb;
    if (a->priority != b->priority) return a->priority < b->priority;
    return a->id < b->id;
  });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(ds.size());
  for (const auto* d : ds) out.emplace_back(d->id, d->efficiency());
  return out;
}

PlanPrediction predict(const std::vector<std::string>& assignment, const PlanRequest& req) {
  const auto inv = layer_inventory(req.model);
  if (assignment.size() != inv.size())
    throw std::invalid_argument("predict: assignment size does not match layer inventory");
  const auto& w = req.workload;
  const double fpt = req.model.flops_per_token();
  const double S = w.n_samples, T = w.tokens_per_sample;

  PlanPrediction pred;
  std::set<std::string> used;
  double io_energy = 0;
  for (size_t i = 0; i < inv.size(); ++i) {
    const DeviceSpec& d = req.fleet.at(assignment[i]);
    used.insert(d.id);
    const double share = inv[i].flops_per_token / fpt;
    pred.energy += share * energy(req.params, d, req.model.n_params, S, T, w.quantization);
    pred.per_device_mem[d.id] += inv[i].mem_footprint;
    pred.latency.prefill += share * static_cast<double>(w.prompt_tokens) * fpt / d.compute_rate();
    pred.latency.decode +=
        share * (S - 1.0) * T * fpt / (d.compute_rate() * d.bandwidth / req.params.b0);
    if (i > 0 && assignment[i] != assignment[i - 1]) {
      const DeviceSpec& prev = req.fleet.at(assignment[i - 1]);
      const double bytes = req.model.hidden_bytes_per_token * boundary_tokens(w);
      const double t = bytes / hop_bandwidth(prev, d);
      pred.latency.io += t;
      io_energy += t * 0.5 * (prev.power_peak + d.power_peak);
    }
  }
  pred.devices_used = static_cast<int>(used.size());
  if (pred.devices_used > 1) {
    const double l = std::log(S);
    const double scaled =
        req.params.overhead_log_base > 0 ? l / std::log(req.params.overhead_log_base) : l;
    pred.latency.overhead = req.params.overhead_const + req.params.overhead_alpha * scaled;
  }
  pred.energy += io_energy;
  pred.latency.total = pred.latency.prefill + pred.latency.decode + pred.latency.io +
                       pred.latency.overhead;
  pred.power = pred.latency.total > 0 ? pred.energy / pred.latency.total : 0.0;
  return pred;
}

std::vector<Constraint> check_constraints(const AllocationPlan& plan, const PlanRequest& req) {
  std::vector<Constraint> out;
  for (const auto& d : req.fleet.devices) {
    double used = 0;
    if (auto it = plan.per_device_mem.find(d.id); it != plan.per_device_mem.end())
      used = it->second;
    out.push_back({"memory:" + d.id, used <= d.mem_max, d.mem_max - used});
  }
  for (const auto& d : req.fleet.devices) {
    // peak draw of the dispatch model: P * gamma_util * lambda
    const double draw = d.power_peak * req.params.gamma_util * d.lambda;
    out.push_back({"power:" + d.id, draw <= d.power_peak, d.power_peak - draw});
  }
  {
    Constraint c{"latency-sla", true, std::numeric_limits<double>::infinity()};
    if (req.workload.latency_sla > 0) {
      c.slack = req.workload.latency_sla - plan.predicted_latency;
      c.satisfied = c.slack >= 0;
    }
    out.push_back(c);
  }
  {
    const double cov = coverage(req.params, req.model.n_params, req.workload.n_samples,
                                req.workload.tokens_per_sample);
    out.push_back({"coverage-min", cov >= req.workload.coverage_min,
                   cov - req.workload.coverage_min});
  }
  // thermal limits bind only on devices the plan actually runs work on; a hot
  // idle device is the pre-check's concern, not the plan's
  for (const auto& d : req.fleet.devices) {
    if (plan.per_device_mem.find(d.id) == plan.per_device_mem.end()) continue;
    const double t = device_temp(req, d);
    out.push_back({"thermal:" + d.id, t <= kThermalExclusionTheta * d.t_max,
                   kThermalExclusionTheta * d.t_max - t});
  }
  return out;
}

namespace {

AllocationPlan finish_plan(std::vector<std::string> assignment, const PlanRequest& req,
                           PlanDiagnostics* diag) {
  AllocationPlan plan;
  plan.assignment = std::move(assignment);
  const PlanPrediction pred = predict(plan.assignment, req);
  plan.predicted_energy = pred.energy;
  plan.predicted_latency = pred.latency.total;
  plan.predicted_power = pred.power;
  plan.per_device_mem = pred.per_device_mem;

  const auto report = check_constraints(plan, req);
  bool all_ok = true;
  for (const auto& c : report) all_ok = all_ok && c.satisfied;
  plan.safety_status = all_ok ? SafetyStatus::OK : SafetyStatus::Infeasible;
  if (all_ok) {
    for (const auto& id : plan.assignment) {
      const DeviceSpec& d = req.fleet.at(id);
      if (device_temp(req, d) > kHotZoneTheta * d.t_max) {
        plan.safety_status = SafetyStatus::ThrottleRisk;
        if (diag) diag->notes.push_back("device " + id + " is in the hot zone");
        break;
      }
    }
  }
  if (diag) diag->constraint_report = report;
  return plan;
}

AllocationPlan infeasible_plan(const ModelSpec& model, PlanDiagnostics* diag,
                               const std::string& why) {
  AllocationPlan plan;
  plan.assignment.assign(layer_inventory(model).size(), "");
  plan.safety_status = SafetyStatus::Infeasible;
  if (diag) diag->notes.push_back(why);
  return plan;
}

}  // namespace

std::pair<AllocationPlan, PlanDiagnostics> greedy_plan(const PlanRequest& req) {
  PlanDiagnostics diag;
  diag.device_ranking = rank_devices(req.fleet);

  const auto inv = layer_inventory(req.model);
  // representative decoder footprint for the capacity preview
  double rep = 0;
  for (const auto& l : inv)
    if (l.role == LayerRole::Decoder) {
      rep = l.mem_footprint;
      break;
    }
  if (rep == 0) rep = inv.front().mem_footprint;
  for (const auto& d : req.fleet.devices)
    diag.max_layers_per_device[d.id] = static_cast<int>(d.mem_max / rep);

  // candidate devices: ranking order minus thermally excluded ones
  std::vector<const DeviceSpec*> ranked;
  for (const auto& [id, score] : diag.device_ranking) {
    (void)score;
    const DeviceSpec& d = req.fleet.at(id);
    if (thermally_excluded(req, d)) {
      diag.notes.push_back("device " + id + " excluded: above 0.85 * t_max");
      continue;
    }
    ranked.push_back(&d);
  }
  if (ranked.empty())
    return {infeasible_plan(req.model, &diag, "no device available after thermal pre-check"),
            diag};

  double total_free = 0;
  for (const auto* d : ranked) total_free += d->mem_max;
  if (req.model.total_bytes() > total_free)
    return {infeasible_plan(req.model, &diag, "model exceeds aggregate fleet memory"), diag};

  std::map<std::string, double> free;
  for (const auto* d : ranked) free[d->id] = d->mem_max;
  std::vector<std::string> assignment(inv.size());

  const size_t head_i = inv.size() - 1;
  const double emb_b = inv[0].mem_footprint, head_b = inv[head_i].mem_footprint;
  // embedding + head co-locate on the top-ranked device when it fits both;
  // otherwise each goes to its own best feasible device
  if (emb_b + head_b <= free[ranked[0]->id]) {
    assignment[0] = assignment[head_i] = ranked[0]->id;
    free[ranked[0]->id] -= emb_b + head_b;
  } else {
    for (size_t slot : {size_t{0}, head_i}) {
      bool placed = false;
      for (const auto* d : ranked)
        if (inv[slot].mem_footprint <= free[d->id]) {
          assignment[slot] = d->id;
          free[d->id] -= inv[slot].mem_footprint;
          placed = true;
          break;
        }
      if (!placed)
        return {infeasible_plan(req.model, &diag,
                                "no device can hold the " + to_string(inv[slot].role) + " block"),
                diag};
    }
  }

  // decoder layers: cheapest feasible device by marginal per-layer energy;
  // ties resolve to the earlier device in the efficiency ranking
  std::vector<const DeviceSpec*> by_cost = ranked;
  std::vector<double> unit_cost(by_cost.size());
  {
    const auto& w = req.workload;
    std::vector<std::pair<double, size_t>> keyed;
    for (size_t i = 0; i < by_cost.size(); ++i) {
      const double e2 = energy(req.params, *by_cost[i], req.model.n_params, w.n_samples,
                               w.tokens_per_sample, w.quantization);
      keyed.emplace_back(e2, i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<const DeviceSpec*> sorted;
    for (const auto& [c, i] : keyed) {
      (void)c;
      sorted.push_back(by_cost[i]);
    }
    by_cost = std::move(sorted);
  }
  for (size_t i = 1; i < head_i; ++i) {
    bool placed = false;
    for (const auto* d : by_cost)
      if (inv[i].mem_footprint <= free[d->id]) {
        assignment[i] = d->id;
        free[d->id] -= inv[i].mem_footprint;
        placed = true;
        break;
      }
    if (!placed)
      return {infeasible_plan(req.model, &diag,
                              "decoder layer " + std::to_string(inv[i].index) +
                                  " does not fit on any device"),
              diag};
  }

  AllocationPlan plan = finish_plan(std::move(assignment), req, &diag);
  return {plan, diag};
}

AllocationPlan brute_force_plan(const PlanRequest& req, double max_states) {
  const auto inv = layer_inventory(req.model);
  std::vector<const DeviceSpec*> cands;
  for (const auto& d : req.fleet.devices)
    if (!thermally_excluded(req, d)) cands.push_back(&d);
  if (cands.empty()) return infeasible_plan(req.model, nullptr, "");

  const size_t L = inv.size(), D = cands.size();
  const double states = std::pow(static_cast<double>(D), static_cast<double>(L));
  if (states > max_states) {
    std::ostringstream os;
    os << "brute_force_plan: " << D << "^" << L << " = " << states
       << " assignments exceeds the guard of " << max_states;
    throw std::length_error(os.str());
  }

  // per-layer, per-device energy shares; io evaluated on the fly
  const auto& w = req.workload;
  const double fpt = req.model.flops_per_token();
  std::vector<double> e2(D);
  for (size_t d = 0; d < D; ++d)
    e2[d] = energy(req.params, *cands[d], req.model.n_params, w.n_samples, w.tokens_per_sample,
                   w.quantization);
  std::vector<std::vector<double>> cost(L, std::vector<double>(D));
  for (size_t l = 0; l < L; ++l)
    for (size_t d = 0; d < D; ++d) cost[l][d] = inv[l].flops_per_token / fpt * e2[d];
  std::vector<std::vector<double>> hop(D, std::vector<double>(D, 0.0));
  const double bbytes = req.model.hidden_bytes_per_token * boundary_tokens(w);
  for (size_t a = 0; a < D; ++a)
    for (size_t b = 0; b < D; ++b)
      if (a != b)
        hop[a][b] = bbytes / hop_bandwidth(*cands[a], *cands[b]) * 0.5 *
                    (cands[a]->power_peak + cands[b]->power_peak);

  std::vector<size_t> a(L, 0), best;
  double best_e = std::numeric_limits<double>::infinity();
  std::vector<double> mem(D);
  while (true) {
    // feasibility: running memory totals
    std::fill(mem.begin(), mem.end(), 0.0);
    bool feasible = true;
    for (size_t l = 0; l < L && feasible; ++l) {
      mem[a[l]] += inv[l].mem_footprint;
      if (mem[a[l]] > cands[a[l]]->mem_max) feasible = false;
    }
    if (feasible) {
      double e = 0;
      for (size_t l = 0; l < L; ++l) {
        e += cost[l][a[l]];
        if (l > 0 && a[l] != a[l - 1]) e += hop[a[l - 1]][a[l]];
      }
      if (e < best_e) {  // strict: first (lexicographically smallest) wins ties
        best_e = e;
        best = a;
      }
    }
    // lexicographic increment, last position fastest
    bool done = true;
    for (size_t pos = L; pos-- > 0;) {
      if (++a[pos] < D) {
        done = false;
        break;
      }
      a[pos] = 0;
    }
    if (done) break;
  }
  if (best.empty()) return infeasible_plan(req.model, nullptr, "");

  std::vector<std::string> assignment(L);
  for (size_t l = 0; l < L; ++l) assignment[l] = cands[best[l]]->id;
  return finish_plan(std::move(assignment), req, nullptr);
}

}  // namespace edgesim
