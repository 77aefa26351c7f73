#pragma once
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace edgesim {

struct ThermalPolicy {
  double theta_throttle = 0.85;      // fraction of t_max where derating starts
  double monitor_period_normal = 1.0;  // seconds
  double monitor_period_hot = 0.1;
  double hot_threshold = 0.70;       // fraction of t_max that switches cadence
};

std::vector<std::string> validate_policy(const ThermalPolicy& p);

// 1.0 below theta * t_max, linear down to 0.0 at t_max, clamped.
double throttle_multiplier(const ThermalPolicy& policy, double temp, double t_max);

struct GuardrailPolicy {
  int max_seq_len = 4096;          // tokens, model context window
  double max_gen_factor = 2.0;     // halt at factor * expected length
  double repetition_fraction = 0.90;
  int repetition_window = 100;     // tokens
  double mem_budget_factor = 1.5;  // of expected memory
  double time_budget_factor = 5.0; // of expected latency
  double token_rate_limit = 0;     // tokens/second; <= 0 disables
};

std::vector<std::string> validate_policy(const GuardrailPolicy& p);

enum class RejectReason { Oversize, Encoding, RateLimit };
enum class HaltReason { LengthCap, Repetition };
std::string to_string(RejectReason r);
std::string to_string(HaltReason r);

struct InputRequest {
  std::string bytes;                 // raw payload, must be valid UTF-8
  int declared_tokens = 0;
  std::vector<double> arrival_times; // seconds, recent request timestamps
};

// nullopt = accept
std::optional<RejectReason> validate_input(const GuardrailPolicy& policy,
                                           const InputRequest& request);

// nullopt = continue generating
std::optional<HaltReason> check_output(const GuardrailPolicy& policy,
                                       const std::vector<int>& generated_tokens,
                                       int expected_len);

// ---- device health ----

enum class HealthStatus { Healthy, Degraded, Failed };
std::string to_string(HealthStatus s);

struct OutcomeOk {};
struct OutcomeError {};
struct OutcomeTimeout {
  double observed = 0;
  double expected = 0;
};
using Outcome = std::variant<OutcomeOk, OutcomeError, OutcomeTimeout>;

struct HealthEvent {
  std::string device;
  HealthStatus from = HealthStatus::Healthy;
  HealthStatus to = HealthStatus::Healthy;
  std::string cause;  // timeout, error_rate, heartbeat, recovery, ramp_complete
  double time = 0;
};

struct HealthConfig {
  int window_size = 100;          // outcomes considered by the error-rate rule
  double error_rate_trip = 0.01;  // strict >
  double timeout_factor = 10.0;
  double heartbeat_interval = 1.0;  // seconds
  int heartbeat_misses = 3;
  double reintro_start = 0.5;
  double ramp_duration = 60.0;    // seconds, linear to full capacity
};

// Per-device health with detection and staged recovery. Single-owner type:
// the simulation loop is the only writer.
class HealthTracker {
 public:
  explicit HealthTracker(HealthConfig cfg = {}) : cfg_(cfg) {}

  void add_device(const std::string& id, double now);
  bool known(const std::string& id) const { return state_.count(id) > 0; }

  std::optional<HealthEvent> observe_outcome(const std::string& id, const Outcome& outcome,
                                             double now);
  void heartbeat(const std::string& id, double now);
  std::vector<HealthEvent> check_heartbeats(double now);

  // Failed -> Degraded at reintro_start capacity (no-op unless Failed).
  std::optional<HealthEvent> recover(const std::string& id, double now);
  // Linear ramp; promotes Degraded -> Healthy at ramp end.
  std::optional<HealthEvent> advance(const std::string& id, double now);

  HealthStatus status(const std::string& id) const;
  double capacity(const std::string& id, double now) const;
  int healthy_count() const;
  int device_count() const { return static_cast<int>(state_.size()); }
  const HealthConfig& config() const { return cfg_; }

 private:
  struct DeviceHealth {
    HealthStatus status = HealthStatus::Healthy;
    std::deque<bool> window;  // true = error
    double last_heartbeat = 0;
    double reintro_capacity = 1.0;
    double ramp_start = 0;
  };
  HealthConfig cfg_;
  std::map<std::string, DeviceHealth> state_;

  DeviceHealth& get(const std::string& id);
  const DeviceHealth& get(const std::string& id) const;
  std::optional<HealthEvent> fail(const std::string& id, DeviceHealth& h, const std::string& why,
                                  double now);
};

// Formal guarantee: latency stays within tau_optimal * d_total / d_healthy.
double degraded_latency_bound(double tau_optimal, int d_total, int d_healthy);

}  // namespace edgesim
