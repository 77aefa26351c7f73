#include "edgesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>

#include "edgesim/rng.hpp"

namespace edgesim {

std::vector<std::string> validate_faults(const FaultScript& s, const DeviceFleet& fleet) {
  std::vector<std::string> out;
  double prev = -1;
  for (const auto& e : s.events) {
    if (e.time < prev) out.push_back("fault times must be nondecreasing");
    prev = e.time;
    if (!fleet.find(e.device)) out.push_back("fault references unknown device: " + e.device);
    if (e.action == FaultAction::Recoverable && !(e.recover_after > 0))
      out.push_back("recover_after must be > 0");
  }
  return out;
}

namespace {

// One-sided positive stable draw with Laplace transform exp(-s^sigma).
double stable_positive(double sigma, Rng& rng) {
  double u;
  do {
    u = rng.uniform01();
  } while (u < 1e-12 || u > 1.0 - 1e-12);
  const double U = u * M_PI;
  const double W = rng.exponential(1.0);
  const double A = std::sin((1.0 - sigma) * U) *
                   std::pow(std::sin(sigma * U), sigma / (1.0 - sigma)) /
                   std::pow(std::sin(U), 1.0 / (1.0 - sigma));
  return std::pow(A / W, (1.0 - sigma) / sigma);
}

}  // namespace

std::vector<double> sample_success_probs(const ScalingParams& params, double n_params,
                                         double tokens, int n_queries, OutcomeModel model,
                                         std::uint64_t seed) {
  std::vector<double> probs(n_queries);
  // strength of a single attempt, ensemble-averaged
  const double a1 = params.alpha * std::pow(n_params, params.beta_n) *
                    std::pow(tokens, params.delta);
  const double sigma = params.beta_s;
  if (model == OutcomeModel::Uniform || sigma >= 1.0 - 1e-9) {
    std::fill(probs.begin(), probs.end(), 1.0 - std::exp(-a1));
    return probs;
  }
  const double scale = std::pow(a1, 1.0 / sigma);
  for (int q = 0; q < n_queries; ++q) {
    Rng rng = derive_rng(seed, "difficulty", static_cast<std::uint64_t>(q));
    const double kappa = scale * stable_positive(sigma, rng);
    probs[q] = 1.0 - std::exp(-kappa);
  }
  return probs;
}

std::vector<std::vector<std::uint8_t>> synthesize_outcomes(const std::vector<double>& probs,
                                                           int n_samples, std::uint64_t seed) {
  std::vector<std::vector<std::uint8_t>> out(probs.size());
  for (size_t q = 0; q < probs.size(); ++q) {
    Rng rng = derive_rng(seed, "samples", q);
    out[q].resize(n_samples);
    for (int s = 0; s < n_samples; ++s) out[q][s] = rng.uniform01() < probs[q] ? 1 : 0;
  }
  return out;
}

void record_pass_outcomes(SimReport& report, std::vector<std::vector<std::uint8_t>> outcomes,
                          int n_samples) {
  for (const auto& row : outcomes)
    if (static_cast<int>(row.size()) != n_samples)
      throw std::invalid_argument("record_pass_outcomes: ragged outcome matrix");
  if (report.queries_submitted > 0 &&
      static_cast<std::int64_t>(outcomes.size()) != report.queries_submitted)
    throw std::invalid_argument("record_pass_outcomes: row count does not match queries");
  report.outcomes = std::move(outcomes);
}

double observed_coverage(const std::vector<std::vector<std::uint8_t>>& outcomes) {
  if (outcomes.empty()) return 0.0;
  std::int64_t any = 0;
  for (const auto& row : outcomes)
    for (auto v : row)
      if (v) {
        ++any;
        break;
      }
  return static_cast<double>(any) / outcomes.size();
}

namespace {

struct Segment {
  std::string dev;
  double share = 0;
};

std::vector<Segment> merge_segments(const std::vector<std::string>& assignment,
                                    const std::vector<LayerSpec>& inv, double fpt) {
  std::vector<Segment> segs;
  for (size_t i = 0; i < assignment.size(); ++i) {
    const double share = inv[i].flops_per_token / fpt;
    if (!segs.empty() && segs.back().dev == assignment[i])
      segs.back().share += share;
    else
      segs.push_back({assignment[i], share});
  }
  return segs;
}

enum ItemKind { kCompute, kHop, kOverhead };
enum PhaseKind { kPrefill, kDecode, kOverheadPhase };

struct Item {
  ItemKind kind = kCompute;
  std::string dev, dev_b;
  double share = 0;  // compute items
  double bytes = 0;  // hop items
};

enum EvType { kPhaseDone, kTick, kFault, kRedistribute, kRecover };

struct Event {
  double t = 0;
  std::uint64_t seq = 0;
  EvType type = kTick;
  std::uint64_t gen = 0;
  int fault_idx = -1;
  std::string dev;
  bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

class Simulation {
 public:
  Simulation(const AllocationPlan& plan, const PlanRequest& req, const ThermalModel& thermal,
             const ThermalPolicy& policy, const GuardrailPolicy& guardrails,
             const FaultScript& faults, const SimOptions& opts)
      : req_(req),
        thermal_(thermal),
        policy_(policy),
        guardrails_(guardrails),
        faults_(faults),
        opts_(opts),
        inv_(layer_inventory(req.model)),
        tracker_(opts.health) {
    if (plan.safety_status == SafetyStatus::Infeasible)
      throw std::invalid_argument("simulate: plan is infeasible, refusing to run");
    if (auto v = validate_faults(faults, req.fleet); !v.empty())
      throw std::invalid_argument("simulate: " + v.front());
    fpt_ = req_.model.flops_per_token();
    assignment_ = plan.assignment;
    for (const auto& d : req_.fleet.devices) {
      tracker_.add_device(d.id, 0.0);
      temp_[d.id] = thermal_.get(d.id).t_ambient;
      mult_[d.id] = 1.0;
      hw_throttled_[d.id] = false;
      busy_total_[d.id] = 0;
      window_busy_[d.id] = 0;
      report_.temperature_trace[d.id].push_back({0.0, temp_[d.id]});
      // dispatch cap that keeps the steady state at or below the soft limit
      const double p_eff = d.power_peak * req_.params.gamma_util * d.lambda;
      const double head = policy_.theta_throttle * d.t_max - thermal_.get(d.id).t_ambient;
      double cap = 1.0;
      if (p_eff > 0) cap = opts_.proactive_margin * head / (thermal_.get(d.id).r_th * p_eff);
      proactive_cap_[d.id] = std::clamp(cap, 0.0, 1.0);
    }
    rebuild_segments();
  }

  SimReport run() {
    const int n_queries = req_.workload.n_queries;
    report_.queries_submitted = n_queries;
    const auto probs =
        sample_success_probs(req_.params, req_.model.n_params, req_.workload.tokens_per_sample,
                             n_queries, opts_.outcome_model, opts_.seed);
    report_.outcomes = synthesize_outcomes(probs, req_.workload.n_samples, opts_.seed);

    for (size_t i = 0; i < faults_.events.size(); ++i)
      push({faults_.events[i].time, next_seq(), kFault, 0, static_cast<int>(i), {}});
    if (n_queries > 0) {
      push({tick_period(), next_seq(), kTick, 0, -1, {}});
      start_query(0.0);
      dispatch(0.0);
    }

    while (!heap_.empty()) {
      Event ev = heap_.top();
      heap_.pop();
      if (drained()) continue;  // work is finished; remaining events are moot
      now_ = ev.t;
      switch (ev.type) {
        case kPhaseDone: on_phase_done(ev); break;
        case kTick: on_tick(); break;
        case kFault: on_fault(faults_.events[ev.fault_idx]); break;
        case kRedistribute: on_redistribute(); break;
        case kRecover: on_recover(ev.dev); break;
      }
    }
    finish();
    return std::move(report_);
  }

 private:
  // --- configuration & state ---
  const PlanRequest& req_;
  const ThermalModel& thermal_;
  const ThermalPolicy& policy_;
  const GuardrailPolicy& guardrails_;
  const FaultScript& faults_;
  const SimOptions& opts_;
  std::vector<LayerSpec> inv_;
  double fpt_ = 0;

  SimReport report_;
  HealthTracker tracker_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> heap_;
  std::uint64_t seq_ = 0;
  std::uint64_t gen_ = 0;
  double now_ = 0;

  std::vector<std::string> assignment_;
  std::vector<Segment> segs_;
  double e_compute_q_ = 0, e_pre_q_ = 0, e_dec_q_ = 0, share_total_ = 0;
  double tau_overhead_ = 0;
  double mean_eff_power_ = 0;

  std::map<std::string, double> temp_, mult_, proactive_cap_;
  std::map<std::string, bool> hw_throttled_;
  std::map<std::string, double> busy_total_, window_busy_;
  std::set<std::string> dead_;
  double last_tick_ = 0;
  bool redistribute_pending_ = false;
  bool infeasible_abort_ = false;

  int cur_query_ = 0;
  double query_start_ = 0;
  double makespan_ = 0;
  PhaseKind phase_ = kPrefill;
  int sample_idx_ = 0;
  // phase item chains are plan-dependent, not query-dependent; cache them
  std::vector<Item> chain_prefill_, chain_decode_, chain_ovh_;
  const std::vector<Item>* chain_ = nullptr;
  size_t item_idx_ = 0;

  struct Active {
    bool on = false;
    std::string dev;
    double start = 0, end = 0;
    Item item;
  } active_;

  std::uint64_t next_seq() { return seq_++; }
  void push(Event ev) { heap_.push(std::move(ev)); }

  bool drained() const {
    return cur_query_ >= req_.workload.n_queries || infeasible_abort_;
  }

  double tick_period() const {
    for (const auto& [id, t] : temp_) {
      const DeviceSpec& d = req_.fleet.at(id);
      if (t > policy_.hot_threshold * d.t_max) return policy_.monitor_period_hot;
    }
    return policy_.monitor_period_normal;
  }

  // --- plan-derived quantities ---
  void rebuild_segments() {
    segs_ = merge_segments(assignment_, inv_, fpt_);
    const auto& w = req_.workload;
    share_total_ = 0;
    e_compute_q_ = 0;
    double tau_pre = 0, tau_dec = 0, p_sum = 0;
    std::set<std::string> used;
    for (const auto& s : segs_) {
      const DeviceSpec& d = req_.fleet.at(s.dev);
      share_total_ += s.share;
      e_compute_q_ += s.share * energy(req_.params, d, req_.model.n_params, w.n_samples,
                                       w.tokens_per_sample, w.quantization);
      tau_pre += s.share * w.prompt_tokens * fpt_ / d.compute_rate();
      tau_dec += s.share * (w.n_samples - 1.0) * w.tokens_per_sample * fpt_ /
                 (d.compute_rate() * d.bandwidth / req_.params.b0);
      if (used.insert(s.dev).second) p_sum += d.power_peak * req_.params.gamma_util * d.lambda;
    }
    mean_eff_power_ = used.empty() ? 0.0 : p_sum / used.size();
    const double tau_sum = tau_pre + tau_dec;
    const double f_pre = tau_sum > 0 ? tau_pre / tau_sum : 1.0;
    e_pre_q_ = e_compute_q_ * f_pre;
    e_dec_q_ = e_compute_q_ - e_pre_q_;
    if (used.size() > 1) {
      const double l = std::log(static_cast<double>(w.n_samples));
      const double scaled = req_.params.overhead_log_base > 0
                                ? l / std::log(req_.params.overhead_log_base)
                                : l;
      tau_overhead_ = req_.params.overhead_const + req_.params.overhead_alpha * scaled;
    } else {
      tau_overhead_ = 0;
    }
    chain_prefill_ = build_chain(kPrefill);
    chain_decode_ = build_chain(kDecode);
    chain_ovh_ = build_chain(kOverheadPhase);
  }

  std::vector<Item> build_chain(PhaseKind phase) const {
    std::vector<Item> chain;
    if (phase == kOverheadPhase) {
      if (tau_overhead_ > 0) chain.push_back({kOverhead, {}, {}, 0, 0});
      return chain;
    }
    const double hop_tokens = phase == kPrefill
                                  ? static_cast<double>(req_.workload.prompt_tokens)
                                  : static_cast<double>(req_.workload.tokens_per_sample);
    for (size_t i = 0; i < segs_.size(); ++i) {
      if (i > 0)
        chain.push_back({kHop, segs_[i - 1].dev, segs_[i].dev,
                         0, req_.model.hidden_bytes_per_token * hop_tokens});
      chain.push_back({kCompute, segs_[i].dev, {}, segs_[i].share, 0});
    }
    return chain;
  }

  double item_duration(const Item& it) const {
    const auto& w = req_.workload;
    switch (it.kind) {
      case kCompute: {
        const DeviceSpec& d = req_.fleet.at(it.dev);
        double nominal;
        if (phase_ == kPrefill) {
          nominal = it.share * w.prompt_tokens * fpt_ / d.compute_rate();
        } else {
          nominal = it.share * ((w.n_samples - 1.0) / w.n_samples) * w.tokens_per_sample * fpt_ /
                    (d.compute_rate() * d.bandwidth / req_.params.b0);
        }
        double m = mult_.at(it.dev);
        if (hw_throttled_.at(it.dev)) m *= opts_.hw_throttle_clock_factor;
        if (m <= 0) m = 1e-6;  // fully throttled: crawl, do not divide by zero
        return nominal / m;
      }
      case kHop: {
        const DeviceSpec& a = req_.fleet.at(it.dev);
        const DeviceSpec& b = req_.fleet.at(it.dev_b);
        return it.bytes / std::min(a.interconnect_bw, b.interconnect_bw);
      }
      case kOverhead: return tau_overhead_;
    }
    return 0;
  }

  double item_energy(const Item& it, double duration) const {
    switch (it.kind) {
      case kCompute: {
        const double frac = share_total_ > 0 ? it.share / share_total_ : 0.0;
        if (phase_ == kPrefill) return e_pre_q_ * frac;
        return e_dec_q_ / req_.workload.n_samples * frac;
      }
      case kHop: {
        const DeviceSpec& a = req_.fleet.at(it.dev);
        const DeviceSpec& b = req_.fleet.at(it.dev_b);
        return duration * 0.5 * (a.power_peak + b.power_peak);
      }
      case kOverhead: return duration * mean_eff_power_;
    }
    return 0;
  }

  // --- query lifecycle ---
  void start_query(double t) {
    while (cur_query_ < req_.workload.n_queries) {
      // admission guardrails: synthetic requests carry valid text and the
      // declared prompt length, so acceptance is the expected path
      InputRequest r;
      r.declared_tokens = req_.workload.prompt_tokens;
      if (auto rej = validate_input(guardrails_, r)) {
        log_event("", "input_rejected", to_string(*rej));
        ++report_.queries_lost;
        ++cur_query_;
        continue;
      }
      query_start_ = t;
      phase_ = kPrefill;
      sample_idx_ = 0;
      chain_ = &chain_prefill_;
      item_idx_ = 0;
      return;
    }
  }

  void dispatch(double t) {
    while (!active_.on && !drained() && !redistribute_pending_) {
      if (item_idx_ >= chain_->size()) {
        if (!advance_phase()) return;  // query finished (or all drained)
        continue;
      }
      const Item& it = (*chain_)[item_idx_];
      const double dur = item_duration(it);
      active_ = {true, it.kind == kCompute ? it.dev : std::string{}, t, t + dur, it};
      push({t + dur, next_seq(), kPhaseDone, gen_, -1, {}});
      return;
    }
  }

  // returns false when the whole workload just completed
  bool advance_phase() {
    switch (phase_) {
      case kPrefill:
        phase_ = kDecode;
        sample_idx_ = 0;
        chain_ = &chain_decode_;
        item_idx_ = 0;
        return true;
      case kDecode:
        if (++sample_idx_ < req_.workload.n_samples) {
          item_idx_ = 0;
          return true;
        }
        phase_ = kOverheadPhase;
        chain_ = &chain_ovh_;
        item_idx_ = 0;
        return true;
      case kOverheadPhase: {
        ++report_.queries_completed;
        report_.query_latency.push_back(now_ - query_start_);
        report_.query_start.push_back(query_start_);
        makespan_ = now_;
        ++cur_query_;
        if (cur_query_ < req_.workload.n_queries) start_query(now_);
        return !drained();
      }
    }
    return false;
  }

  void on_phase_done(const Event& ev) {
    if (ev.gen != gen_ || !active_.on) return;
    if (!active_.dev.empty() && dead_.count(active_.dev)) return;  // hung on a dead device
    const Item it = active_.item;
    const double dur = active_.end - active_.start;
    const double e = item_energy(it, dur);
    if (it.kind == kCompute) {
      if (phase_ == kPrefill) {
        report_.energy_prefill += e;
        report_.latency_sum.prefill += dur;
      } else {
        report_.energy_decode += e;
        report_.latency_sum.decode += dur;
      }
      window_busy_[active_.dev] += active_.end - std::max(active_.start, last_tick_);
      busy_total_[active_.dev] += dur;
      // completed work is evidence of health
      tracker_.observe_outcome(active_.dev, OutcomeOk{}, now_);
    } else if (it.kind == kHop) {
      report_.energy_overhead += e;
      report_.latency_sum.io += dur;
    } else {
      report_.energy_overhead += e;
      report_.latency_sum.overhead += dur;
    }
    active_.on = false;
    ++item_idx_;
    dispatch(now_);
  }

  // --- monitoring, thermal, health ---
  void on_tick() {
    const double dt = now_ - last_tick_;
    if (dt <= 0) return;
    for (auto& [id, t] : temp_) {
      const DeviceSpec& d = req_.fleet.at(id);
      double busy = window_busy_[id];
      if (active_.on && active_.dev == id && !dead_.count(id))
        busy += now_ - std::max(active_.start, last_tick_);
      const double duty = std::clamp(busy / dt, 0.0, 1.0);
      double m = mult_.at(id);
      if (hw_throttled_.at(id)) m *= opts_.hw_throttle_clock_factor;
      const double power =
          dead_.count(id) ? 0.0 : d.power_peak * req_.params.gamma_util * d.lambda * m * duty;
      const double t_new = step_temperature(thermal_, id, t, power, dt);
      const double knee = policy_.theta_throttle * d.t_max;
      if (t <= knee && t_new > knee) {
        ++report_.threshold_crossings;
        log_event(id, "threshold_crossing", "soft limit exceeded");
      }
      if (t < d.t_max && t_new >= d.t_max) {
        ++report_.throttle_event_count;
        hw_throttled_[id] = true;
        log_event(id, "hw_throttle", "t_max reached, clock cut engaged");
      } else if (hw_throttled_[id] && t_new < knee) {
        hw_throttled_[id] = false;  // recovered well below the derating band
        log_event(id, "hw_throttle_clear", "");
      }
      t = t_new;
      report_.temperature_trace[id].push_back({now_, t});
      report_.utilization_trace[id].push_back({now_, duty});
      window_busy_[id] = 0;
      if (opts_.governor_on) {
        mult_[id] = std::min(throttle_multiplier(policy_, t, d.t_max), proactive_cap_.at(id));
      } else {
        mult_[id] = 1.0;
      }
    }
    // liveness + staged recovery
    for (const auto& d : req_.fleet.devices)
      if (!dead_.count(d.id) && tracker_.status(d.id) != HealthStatus::Failed)
        tracker_.heartbeat(d.id, now_);
    for (const auto& hev : tracker_.check_heartbeats(now_)) on_device_failed(hev);
    for (const auto& d : req_.fleet.devices) {
      if (auto ev = tracker_.advance(d.id, now_)) {
        log_event(d.id, "health", ev->cause);
        if (ev->cause == "ramp_complete") replan("reintegrated " + d.id);
      }
    }
    last_tick_ = now_;
    push({now_ + tick_period(), next_seq(), kTick, 0, -1, {}});
  }

  void on_fault(const FaultEvent& f) {
    dead_.insert(f.device);
    log_event(f.device, "fault_injected",
              f.action == FaultAction::Fail ? "hard" : "recoverable");
    if (f.action == FaultAction::Recoverable)
      push({now_ + f.recover_after, next_seq(), kRecover, 0, -1, f.device});
  }

  void on_device_failed(const HealthEvent& hev) {
    log_event(hev.device, "device_failed", hev.cause);
    if (!redistribute_pending_) {
      redistribute_pending_ = true;
      push({now_ + opts_.redistribution_delay, next_seq(), kRedistribute, 0, -1, {}});
    }
  }

  void on_redistribute() {
    redistribute_pending_ = false;
    replan("redistribution");
  }

  void on_recover(const std::string& dev) {
    dead_.erase(dev);
    if (auto ev = tracker_.recover(dev, now_))
      log_event(dev, "health", "recovery accepted, capacity " +
                                   std::to_string(tracker_.capacity(dev, now_)));
  }

  void replan(const std::string& why) {
    PlanRequest sub = req_;
    sub.fleet.devices.clear();
    for (const auto& d : req_.fleet.devices)
      if (tracker_.status(d.id) == HealthStatus::Healthy && !dead_.count(d.id))
        sub.fleet.devices.push_back(d);
    sub.thermal_state.clear();
    for (const auto& [id, t] : temp_) sub.thermal_state[id] = t;
    ++gen_;
    active_.on = false;
    if (sub.fleet.devices.empty()) {
      abort_remaining(why + ": no devices left");
      return;
    }
    auto [plan, diag] = greedy_plan(sub);
    if (plan.safety_status == SafetyStatus::Infeasible) {
      abort_remaining(why + ": no feasible assignment on surviving devices");
      return;
    }
    assignment_ = plan.assignment;
    rebuild_segments();
    chain_ = phase_ == kPrefill ? &chain_prefill_
             : phase_ == kDecode ? &chain_decode_
                                 : &chain_ovh_;
    item_idx_ = 0;  // conservative restart of the interrupted phase
    log_event("", why, "active phase restarted on " + std::to_string(segs_.size()) +
                           " segment(s)");
    dispatch(now_);
  }

  void abort_remaining(const std::string& why) {
    const int remaining = req_.workload.n_queries - cur_query_;
    report_.queries_lost += remaining;
    infeasible_abort_ = true;
    makespan_ = now_;
    log_event("", "workload_aborted", why + ", " + std::to_string(remaining) + " queries lost");
  }

  void log_event(const std::string& dev, const std::string& kind, const std::string& detail) {
    report_.events.push_back({now_, dev, kind, detail});
  }

  void finish() {
    report_.makespan = makespan_;
    report_.total_energy =
        report_.energy_prefill + report_.energy_decode + report_.energy_overhead;
    auto& l = report_.latency_sum;
    l.total = l.prefill + l.decode + l.io + l.overhead;
    if (report_.makespan > 0) {
      report_.avg_power = report_.total_energy / report_.makespan;
      for (auto& [id, b] : busy_total_) report_.utilization[id] = b / report_.makespan;
    }
  }
};

}  // namespace

SimReport simulate(const AllocationPlan& plan, const PlanRequest& req, const ThermalModel& thermal,
                   const ThermalPolicy& policy, const GuardrailPolicy& guardrails,
                   const FaultScript& faults, const SimOptions& opts) {
  Simulation sim(plan, req, thermal, policy, guardrails, faults, opts);
  return sim.run();
}

}  // namespace edgesim
