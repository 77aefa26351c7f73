#include "edgesim/safety.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace edgesim {

std::vector<std::string> validate_policy(const ThermalPolicy& p) {
  std::vector<std::string> out;
  if (!(p.theta_throttle > 0 && p.theta_throttle < 1))
    out.push_back("theta_throttle must be in (0, 1)");
  if (!(p.hot_threshold < p.theta_throttle))
    out.push_back("hot_threshold must be below theta_throttle");
  if (!(p.monitor_period_normal > 0) || !(p.monitor_period_hot > 0))
    out.push_back("monitor periods must be > 0");
  return out;
}

double throttle_multiplier(const ThermalPolicy& policy, double temp, double t_max) {
  if (temp < 0 || !(t_max > 0))
    throw std::invalid_argument("throttle_multiplier: bad temperature inputs");
  const double knee = policy.theta_throttle * t_max;
  if (temp <= knee) return 1.0;
  const double m = 1.0 - (temp - knee) / (t_max - knee);
  return m < 0.0 ? 0.0 : (m > 1.0 ? 1.0 : m);
}

std::vector<std::string> validate_policy(const GuardrailPolicy& p) {
  std::vector<std::string> out;
  if (p.max_seq_len < 1) out.push_back("max_seq_len must be >= 1");
  if (!(p.max_gen_factor > 1)) out.push_back("max_gen_factor must be > 1");
  if (!(p.repetition_fraction > 0 && p.repetition_fraction < 1))
    out.push_back("repetition_fraction must be in (0, 1)");
  if (p.repetition_window < 1) out.push_back("repetition_window must be >= 1");
  if (!(p.mem_budget_factor > 1)) out.push_back("mem_budget_factor must be > 1");
  if (!(p.time_budget_factor > 1)) out.push_back("time_budget_factor must be > 1");
  return out;
}

std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::Oversize: return "oversize";
    case RejectReason::Encoding: return "encoding";
    case RejectReason::RateLimit: return "rate_limit";
  }
  return "?";
}

std::string to_string(HaltReason r) {
  return r == HaltReason::LengthCap ? "length_cap" : "repetition";
}

std::string to_string(HealthStatus s) {
  switch (s) {
    case HealthStatus::Healthy: return "healthy";
    case HealthStatus::Degraded: return "degraded";
    case HealthStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

bool valid_utf8(const std::string& s) {
  size_t i = 0;
  const auto n = s.size();
  while (i < n) {
    const unsigned char c = s[i];
    size_t len;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      if (c < 0xC2) return false;  // overlong
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      if (c > 0xF4) return false;  // beyond U+10FFFF
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (size_t j = 1; j < len; ++j)
      if ((static_cast<unsigned char>(s[i + j]) & 0xC0) != 0x80) return false;
    i += len;
  }
  return true;
}

}  // namespace

std::optional<RejectReason> validate_input(const GuardrailPolicy& policy,
                                           const InputRequest& request) {
  if (request.declared_tokens > policy.max_seq_len) return RejectReason::Oversize;
  if (!valid_utf8(request.bytes)) return RejectReason::Encoding;
  if (policy.token_rate_limit > 0 && request.arrival_times.size() >= 2) {
    const double span =
        request.arrival_times.back() - request.arrival_times.front();
    if (span > 0) {
      const double rate =
          static_cast<double>(request.declared_tokens) * request.arrival_times.size() / span;
      if (rate > policy.token_rate_limit) return RejectReason::RateLimit;
    }
  }
  return std::nullopt;
}

std::optional<HaltReason> check_output(const GuardrailPolicy& policy,
                                       const std::vector<int>& generated_tokens,
                                       int expected_len) {
  if (expected_len > 0 &&
      static_cast<double>(generated_tokens.size()) >= policy.max_gen_factor * expected_len)
    return HaltReason::LengthCap;
  const int w = policy.repetition_window;
  if (static_cast<int>(generated_tokens.size()) >= w) {
    std::map<int, int> freq;
    int top = 0;
    for (size_t i = generated_tokens.size() - w; i < generated_tokens.size(); ++i)
      top = std::max(top, ++freq[generated_tokens[i]]);
    if (static_cast<double>(top) > policy.repetition_fraction * w)
      return HaltReason::Repetition;
  }
  return std::nullopt;
}

// ---- HealthTracker ----

void HealthTracker::add_device(const std::string& id, double now) {
  DeviceHealth h;
  h.last_heartbeat = now;
  state_[id] = h;
}

HealthTracker::DeviceHealth& HealthTracker::get(const std::string& id) {
  auto it = state_.find(id);
  if (it == state_.end()) throw std::out_of_range("health: unknown device " + id);
  return it->second;
}

const HealthTracker::DeviceHealth& HealthTracker::get(const std::string& id) const {
  auto it = state_.find(id);
  if (it == state_.end()) throw std::out_of_range("health: unknown device " + id);
  return it->second;
}

std::optional<HealthEvent> HealthTracker::fail(const std::string& id, DeviceHealth& h,
                                               const std::string& why, double now) {
  if (h.status == HealthStatus::Failed) return std::nullopt;
  HealthEvent ev{id, h.status, HealthStatus::Failed, why, now};
  h.status = HealthStatus::Failed;
  h.reintro_capacity = 0.0;
  h.window.clear();
  return ev;
}

std::optional<HealthEvent> HealthTracker::observe_outcome(const std::string& id,
                                                          const Outcome& outcome, double now) {
  DeviceHealth& h = get(id);
  if (h.status == HealthStatus::Failed) return std::nullopt;

  if (const auto* t = std::get_if<OutcomeTimeout>(&outcome)) {
    if (t->observed > cfg_.timeout_factor * t->expected)
      return fail(id, h, "timeout", now);
    return std::nullopt;
  }
  h.window.push_back(std::holds_alternative<OutcomeError>(outcome));
  while (static_cast<int>(h.window.size()) > cfg_.window_size) h.window.pop_front();
  // the rule only arms once a full window of evidence exists
  if (static_cast<int>(h.window.size()) >= cfg_.window_size) {
    int errors = 0;
    for (bool e : h.window) errors += e;
    if (static_cast<double>(errors) > cfg_.error_rate_trip * h.window.size())
      return fail(id, h, "error_rate", now);
  }
  return std::nullopt;
}

void HealthTracker::heartbeat(const std::string& id, double now) {
  get(id).last_heartbeat = now;
}

std::vector<HealthEvent> HealthTracker::check_heartbeats(double now) {
  std::vector<HealthEvent> out;
  for (auto& [id, h] : state_) {
    if (h.status == HealthStatus::Failed) continue;
    if (now - h.last_heartbeat > cfg_.heartbeat_misses * cfg_.heartbeat_interval) {
      if (auto ev = fail(id, h, "heartbeat", now)) out.push_back(*ev);
    }
  }
  return out;
}

std::optional<HealthEvent> HealthTracker::recover(const std::string& id, double now) {
  DeviceHealth& h = get(id);
  if (h.status != HealthStatus::Failed) return std::nullopt;
  HealthEvent ev{id, HealthStatus::Failed, HealthStatus::Degraded, "recovery", now};
  h.status = HealthStatus::Degraded;
  h.reintro_capacity = cfg_.reintro_start;
  h.ramp_start = now;
  h.last_heartbeat = now;
  return ev;
}

std::optional<HealthEvent> HealthTracker::advance(const std::string& id, double now) {
  DeviceHealth& h = get(id);
  if (h.status != HealthStatus::Degraded) return std::nullopt;
  const double frac = (now - h.ramp_start) / cfg_.ramp_duration;
  h.reintro_capacity =
      cfg_.reintro_start + (1.0 - cfg_.reintro_start) * std::clamp(frac, 0.0, 1.0);
  if (frac >= 1.0) {
    h.status = HealthStatus::Healthy;
    h.reintro_capacity = 1.0;
    return HealthEvent{id, HealthStatus::Degraded, HealthStatus::Healthy, "ramp_complete", now};
  }
  return std::nullopt;
}

HealthStatus HealthTracker::status(const std::string& id) const { return get(id).status; }

double HealthTracker::capacity(const std::string& id, double now) const {
  const DeviceHealth& h = get(id);
  switch (h.status) {
    case HealthStatus::Healthy: return 1.0;
    case HealthStatus::Failed: return 0.0;
    case HealthStatus::Degraded: {
      const double frac = std::clamp((now - h.ramp_start) / cfg_.ramp_duration, 0.0, 1.0);
      return cfg_.reintro_start + (1.0 - cfg_.reintro_start) * frac;
    }
  }
  return 0.0;
}

int HealthTracker::healthy_count() const {
  int n = 0;
  for (const auto& [id, h] : state_) n += h.status == HealthStatus::Healthy;
  return n;
}

double degraded_latency_bound(double tau_optimal, int d_total, int d_healthy) {
  if (d_healthy < 1)
    throw std::invalid_argument("degraded_latency_bound: no healthy devices, guarantee void");
  if (d_healthy > d_total)
    throw std::invalid_argument("degraded_latency_bound: d_healthy exceeds d_total");
  return tau_optimal * static_cast<double>(d_total) / static_cast<double>(d_healthy);
}

}  // namespace edgesim
