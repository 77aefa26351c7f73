#include "edgesim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace edgesim {

double pass_at_k(int n, int c, int k, PassAtKEstimator est) {
  if (c < 0 || c > n) throw std::invalid_argument("pass_at_k: need 0 <= c <= n");
  if (k < 1 || k > n) throw std::invalid_argument("pass_at_k: need 1 <= k <= n");
  if (est == PassAtKEstimator::Naive) {
    const double p = static_cast<double>(c) / n;
    return 1.0 - std::pow(1.0 - p, k);
  }
  if (n - c < k) return 1.0;
  // C(n-c,k)/C(n,k) = prod_{i=0}^{k-1} (n-c-i)/(n-i)
  double q = 1.0;
  for (int i = 0; i < k; ++i) q *= static_cast<double>(n - c - i) / (n - i);
  return 1.0 - q;
}

double pass_at_k_enumerated(int n, int c, int k) {
  if (c < 0 || c > n) throw std::invalid_argument("pass_at_k_enumerated: need 0 <= c <= n");
  if (k < 1 || k > n) throw std::invalid_argument("pass_at_k_enumerated: need 1 <= k <= n");
  if (n > 24) throw std::invalid_argument("pass_at_k_enumerated: n too large to enumerate");
  // samples 0..c-1 marked correct; walk every k-subset of {0..n-1}
  long total = 0, hit = 0;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    ++total;
    bool any = false;
    for (int i : idx)
      if (i < c) {
        any = true;
        break;
      }
    if (any) ++hit;
    int j = k - 1;
    while (j >= 0 && idx[j] == n - k + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int m = j + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
  return static_cast<double>(hit) / total;
}

double pass_at_k_mean(const std::vector<std::pair<int, int>>& per_query, int k,
                      PassAtKEstimator est) {
  if (per_query.empty()) throw std::invalid_argument("pass_at_k_mean: no queries");
  double s = 0;
  for (const auto& [n, c] : per_query) s += pass_at_k(n, c, k, est);
  return s / per_query.size();
}

double ipw(double coverage_pct, double avg_power_watts) {
  if (!(avg_power_watts > 0)) throw std::invalid_argument("ipw: power must be > 0");
  return coverage_pct / avg_power_watts;
}

double ece(double coverage_fraction, double total_energy_joules) {
  if (!(total_energy_joules > 0)) throw std::invalid_argument("ece: energy must be > 0");
  return coverage_fraction / total_energy_joules;
}

double ppp(double coverage_fraction, double throughput_tok_s, double avg_power_watts,
           double cost_per_query, const PppConfig& cfg) {
  if (!(avg_power_watts > 0) || !(cost_per_query > 0))
    throw std::invalid_argument("ppp: power and cost must be > 0");
  const double perf = coverage_fraction * throughput_tok_s;
  const double denom = std::pow(avg_power_watts / cfg.power_norm, cfg.weights[1]) *
                       std::pow(cost_per_query / cfg.cost_norm, cfg.weights[2]);
  return std::pow(perf, cfg.weights[0]) / denom;
}

static double rel_residual(double total, double sum) {
  const double scale = std::max(std::abs(total), std::abs(sum));
  if (scale == 0.0) return 0.0;
  return std::abs(total - sum) / scale;
}

BreakdownCheck breakdown_check(const SimReport& report, double tol) {
  BreakdownCheck r;
  r.energy_residual = rel_residual(
      report.total_energy,
      report.energy_prefill + report.energy_decode + report.energy_overhead);
  const auto& l = report.latency_sum;
  r.latency_residual = rel_residual(l.total, l.prefill + l.decode + l.io + l.overhead);
  r.ok = r.energy_residual <= tol && r.latency_residual <= tol;
  return r;
}

MetricSet compute_metrics(const SimReport& report, const WorkloadSpec& workload,
                          double cost_per_query, const PppConfig& cfg,
                          const std::vector<int>& ks) {
  MetricSet m;
  const double S = workload.n_samples, T = workload.tokens_per_sample;
  if (report.total_energy > 0 && report.queries_completed > 0)
    m.energy_per_token = report.total_energy / (report.queries_completed * S * T);
  if (report.makespan > 0)
    m.throughput = report.queries_completed * S * T / report.makespan;

  double cov = 0;
  if (!report.outcomes.empty()) {
    std::int64_t any = 0;
    for (const auto& row : report.outcomes) {
      for (auto v : row)
        if (v) {
          ++any;
          break;
        }
    }
    cov = static_cast<double>(any) / report.outcomes.size();

    std::vector<std::pair<int, int>> nc;
    nc.reserve(report.outcomes.size());
    for (const auto& row : report.outcomes) {
      int c = 0;
      for (auto v : row) c += v != 0;
      nc.emplace_back(static_cast<int>(row.size()), c);
    }
    for (int k : ks) {
      if (k < 1 || k > workload.n_samples) continue;
      m.pass_at_k.emplace_back(k, pass_at_k_mean(nc, k));
    }
  }
  if (report.avg_power > 0) m.ipw = ipw(cov * 100.0, report.avg_power);
  if (report.total_energy > 0) m.ece = ece(cov, report.total_energy);
  if (report.avg_power > 0 && cost_per_query > 0)
    m.ppp = ppp(cov, m.throughput, report.avg_power, cost_per_query, cfg);
  return m;
}

}  // namespace edgesim
