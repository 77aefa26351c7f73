#include "edgesim/lawfit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgesim/rng.hpp"

namespace edgesim {

namespace {

constexpr double kSaturated = 1.0 - 1e-9;

struct Point {
  double s, c;
};

std::vector<Point> usable_points(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Point> out;
  for (const auto& [s, c] : pts)
    if (c < kSaturated) out.push_back({s, c});
  return out;
}

double model_c(double a, double b, double s) { return 1.0 - std::exp(-a * std::pow(s, b)); }

double ssr(const std::vector<Point>& pts, double a, double b) {
  double acc = 0;
  for (const auto& p : pts) {
    const double r = p.c - model_c(a, b, p.s);
    acc += r * r;
  }
  return acc;
}

// Weighted linear regression of y on x; returns (intercept, slope).
bool linearized_init(const std::vector<Point>& pts, double& a0, double& b0) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& p : pts) {
    if (p.c <= 1e-12) continue;  // log of ~zero
    const double x = std::log(p.s);
    const double y = std::log(-std::log(1.0 - p.c));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return false;
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) return false;
  const double slope = (n * sxy - sx * sy) / det;
  const double inter = (sy - slope * sx) / n;
  a0 = std::exp(inter);
  b0 = slope;
  return a0 > 0 && b0 > 0 && std::isfinite(a0) && std::isfinite(b0);
}

struct CoreFit {
  double a = 0, b = 0;
  bool converged = false;
  int iterations = 0;
};

// Damped Gauss-Newton over (log a, log b); keeps both parameters positive.
CoreFit solve(const std::vector<Point>& pts) {
  CoreFit out;
  double a0 = 0.05, b0 = 0.7;
  if (!linearized_init(pts, a0, b0)) {
    // fall back to a coarse positive guess; the solver may still converge
    a0 = 0.05;
    b0 = 0.7;
  }
  double la = std::log(a0), lb = std::log(b0);
  const int max_iter = 200;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const double a = std::exp(la), b = std::exp(lb);
    // normal equations J^T J step = J^T r with J in log-parameter space
    double h00 = 0, h01 = 0, h11 = 0, g0 = 0, g1 = 0;
    for (const auto& p : pts) {
      const double sb = std::pow(p.s, b);
      const double e = std::exp(-a * sb);
      const double r = p.c - (1.0 - e);
      const double ja = e * sb * a;                    // d model / d log a
      const double jb = e * a * sb * std::log(p.s) * b;  // d model / d log b
      h00 += ja * ja;
      h01 += ja * jb;
      h11 += jb * jb;
      g0 += ja * r;
      g1 += jb * r;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(std::abs(det) > 1e-300)) break;
    double da = (h11 * g0 - h01 * g1) / det;
    double db = (h00 * g1 - h01 * g0) / det;
    // damped line search on the objective
    const double s0 = ssr(pts, a, b);
    double lam = 1.0;
    double nla = la, nlb = lb;
    while (lam > 1e-14) {
      nla = la + lam * da;
      nlb = lb + lam * db;
      if (ssr(pts, std::exp(nla), std::exp(nlb)) <= s0) break;
      lam *= 0.5;
    }
    const double rel = std::max(std::abs(nla - la), std::abs(nlb - lb));
    la = nla;
    lb = nlb;
    if (rel < 1e-10) {
      out.converged = true;
      break;
    }
  }
  out.a = std::exp(la);
  out.b = std::exp(lb);
  if (!std::isfinite(out.a) || !std::isfinite(out.b)) out.converged = false;
  return out;
}

double r_squared(const std::vector<Point>& pts, double a, double b) {
  double mean = 0;
  for (const auto& p : pts) mean += p.c;
  mean /= pts.size();
  double ss_tot = 0, ss_res = 0;
  for (const auto& p : pts) {
    ss_tot += (p.c - mean) * (p.c - mean);
    const double r = p.c - model_c(a, b, p.s);
    ss_res += r * r;
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

std::vector<std::string> validate_curve(const CoverageCurve& curve) {
  std::vector<std::string> out;
  double prev = -1;
  for (const auto& [s, c] : curve.points) {
    if (!(s > prev)) out.push_back("n_samples values must be strictly increasing");
    if (c < 0 || c > 1) out.push_back("coverage out of [0, 1]");
    prev = s;
  }
  return out;
}

FitResult fit_coverage(const CoverageCurve& curve) {
  auto pts = usable_points(curve.points);
  if (pts.size() < 3)
    throw std::invalid_argument("fit_coverage: need >= 3 unsaturated points, have " +
                                std::to_string(pts.size()));
  const CoreFit f = solve(pts);
  FitResult r;
  r.alpha_hat = f.a;
  r.beta_hat = f.b;
  r.converged = f.converged;
  r.iterations = f.iterations;
  r.points_used = static_cast<int>(pts.size());
  r.r_squared = r_squared(pts, f.a, f.b);
  return r;
}

std::optional<std::pair<double, double>> bootstrap_ci(const CoverageCurve& curve, int iterations,
                                                      std::uint64_t seed) {
  if (iterations < 1) throw std::invalid_argument("bootstrap_ci: iterations must be >= 1");
  auto pts = usable_points(curve.points);
  if (pts.size() < 3) throw std::invalid_argument("bootstrap_ci: curve not fittable");
  const auto n = pts.size();
  std::vector<double> betas;
  betas.reserve(iterations);
  int failures = 0;
  for (int it = 0; it < iterations; ++it) {
    // per-iteration derived stream: result independent of evaluation order
    Rng rng = derive_rng(seed, "bootstrap", static_cast<std::uint64_t>(it));
    std::vector<Point> sample(n);
    for (size_t j = 0; j < n; ++j) sample[j] = pts[rng.below(n)];
    // a resample can collapse onto < 3 distinct abscissae, which is a failure
    std::vector<double> xs;
    for (const auto& p : sample) xs.push_back(p.s);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.size() < 3) {
      ++failures;
      continue;
    }
    const CoreFit f = solve(sample);
    if (!std::isfinite(f.b) || f.b <= 0 || f.b > 50) {
      ++failures;
      continue;
    }
    betas.push_back(f.b);
  }
  if (failures > iterations / 5) return std::nullopt;  // > 20% refit failures
  std::sort(betas.begin(), betas.end());
  auto pct = [&](double q) {
    const double pos = q * (betas.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, betas.size() - 1);
    const double w = pos - lo;
    return betas[lo] * (1.0 - w) + betas[hi] * w;
  };
  return std::make_pair(pct(0.025), pct(0.975));
}

SensitivityResult range_sensitivity(const CoverageCurve& curve,
                                    const std::vector<std::pair<double, double>>& ranges) {
  SensitivityResult out;
  for (const auto& [lo, hi] : ranges) {
    RangeFit rf;
    rf.s_min = lo;
    rf.s_max = hi;
    CoverageCurve sub;
    for (const auto& p : curve.points)
      if (p.first >= lo && p.first <= hi) sub.points.push_back(p);
    if (usable_points(sub.points).size() < 3) {
      rf.note = "skipped: fewer than 3 usable points in range";
      out.fits.push_back(rf);
      continue;
    }
    const FitResult f = fit_coverage(sub);
    rf.ok = true;
    rf.beta_hat = f.beta_hat;
    out.fits.push_back(rf);
  }
  const RangeFit* first = nullptr;
  const RangeFit* last = nullptr;
  for (const auto& rf : out.fits)
    if (rf.ok) {
      if (!first) first = &rf;
      last = &rf;
    }
  if (first && last) out.delta_beta = last->beta_hat - first->beta_hat;
  return out;
}

}  // namespace edgesim
