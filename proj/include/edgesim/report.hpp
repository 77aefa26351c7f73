#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "edgesim/scaling.hpp"

namespace edgesim {

struct SafetyEvent {
  double time = 0;
  std::string device;
  std::string kind;     // e.g. degraded_entered, device_failed, redistributed
  std::string detail;
};

struct TracePoint {
  double time = 0;
  double value = 0;
};

// Everything a simulation run reports. Totals are defined as the sum of their
// parts, so the additivity identities hold by construction.
struct SimReport {
  double energy_prefill = 0;   // joules
  double energy_decode = 0;
  double energy_overhead = 0;  // transfers + scheduling
  double total_energy = 0;

  LatencyBreakdown latency_sum;            // summed over completed queries
  std::vector<double> query_latency;       // seconds per completed query
  std::vector<double> query_start;         // start time per completed query
  double makespan = 0;                     // seconds of simulated wall time
  double avg_power = 0;                    // watts = total_energy / makespan

  std::int64_t queries_submitted = 0;
  std::int64_t queries_completed = 0;
  std::int64_t queries_lost = 0;

  std::map<std::string, std::vector<TracePoint>> temperature_trace;
  std::map<std::string, std::vector<TracePoint>> utilization_trace;  // per-tick duty
  std::map<std::string, double> utilization;  // busy time / makespan
  std::vector<SafetyEvent> events;
  std::int64_t throttle_event_count = 0;      // hardware-level (t_max) events
  std::int64_t threshold_crossings = 0;       // soft-threshold crossings seen

  // per-query sample outcomes, n_queries x S, 1 = solved
  std::vector<std::vector<std::uint8_t>> outcomes;
};

}  // namespace edgesim
