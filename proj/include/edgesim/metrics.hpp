#pragma once
#include <array>
#include <optional>

#include "edgesim/report.hpp"

namespace edgesim {

struct MetricSet {
  double ipw = 0;              // coverage percent per watt
  double ece = 0;              // coverage fraction per joule
  double ppp = 0;              // composite score, see ppp()
  std::vector<std::pair<int, double>> pass_at_k;  // (k, estimate)
  double energy_per_token = 0;
  double throughput = 0;       // generated tokens per second
};

enum class PassAtKEstimator { Unbiased, Naive };

// Probability that a size-k subset of n samples contains >= 1 of the c correct
// ones. The unbiased form evaluates 1 - C(n-c,k)/C(n,k) without factorials.
double pass_at_k(int n, int c, int k,
                 PassAtKEstimator est = PassAtKEstimator::Unbiased);

// Exhaustive subset enumeration; reference oracle for small n.
double pass_at_k_enumerated(int n, int c, int k);

// Mean over per-query (n, c) counts at fixed k.
double pass_at_k_mean(const std::vector<std::pair<int, int>>& per_query, int k,
                      PassAtKEstimator est = PassAtKEstimator::Unbiased);

double ipw(double coverage_pct, double avg_power_watts);
double ece(double coverage_fraction, double total_energy_joules);

struct PppConfig {
  std::array<double, 3> weights = {1.0, 1.0, 1.0};
  double power_norm = 100.0;  // watts per normalized power unit
  double cost_norm = 0.01;    // currency per normalized cost unit
};
double ppp(double coverage_fraction, double throughput_tok_s, double avg_power_watts,
           double cost_per_query, const PppConfig& cfg = {});

struct BreakdownCheck {
  bool ok = true;
  double energy_residual = 0;   // relative
  double latency_residual = 0;  // relative
};
// Verifies the additivity identities of a report at 1e-9 relative tolerance.
BreakdownCheck breakdown_check(const SimReport& report, double tol = 1e-9);

// Convenience: derive the standard metric block from a finished run.
MetricSet compute_metrics(const SimReport& report, const WorkloadSpec& workload,
                          double cost_per_query = 0, const PppConfig& cfg = {},
                          const std::vector<int>& ks = {1, 5, 10, 20});

}  // namespace edgesim
