#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace edgesim {

struct CoverageCurve {
  std::vector<std::pair<double, double>> points;  // (n_samples, coverage), S increasing
  std::string label;
};

struct FitResult {
  double alpha_hat = 0;
  double beta_hat = 0;
  double r_squared = 0;
  bool converged = false;
  int iterations = 0;
  int points_used = 0;
  std::optional<std::pair<double, double>> ci_95;  // for beta; empty if unavailable
  int n_bootstrap = 0;
};

std::vector<std::string> validate_curve(const CoverageCurve& curve);

// Least squares on C(S) = 1 - exp(-a * S^b), residuals on the coverage scale.
// Initialized from the log-log linearization, refined by damped Gauss-Newton.
// Throws std::invalid_argument when fewer than 3 usable points remain after
// dropping saturated ones.
FitResult fit_coverage(const CoverageCurve& curve);

// Percentile bootstrap over resampled points. Returns nullopt when more than
// 20% of refits fail.
std::optional<std::pair<double, double>> bootstrap_ci(const CoverageCurve& curve, int iterations,
                                                      std::uint64_t seed);

struct RangeFit {
  double s_min = 0, s_max = 0;
  bool ok = false;
  double beta_hat = 0;
  std::string note;
};
struct SensitivityResult {
  std::vector<RangeFit> fits;
  double delta_beta = 0;  // beta(last usable range) - beta(first usable range)
};
SensitivityResult range_sensitivity(const CoverageCurve& curve,
                                    const std::vector<std::pair<double, double>>& ranges);

}  // namespace edgesim
