#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "edgesim/config.hpp"
#include "edgesim/json_io.hpp"
#include "edgesim/metrics.hpp"
#include "edgesim/planner.hpp"
#include "edgesim/presets.hpp"
#include "edgesim/rng.hpp"
#include "edgesim/sim.hpp"

namespace es = edgesim;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInsufficient = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioArgs {
  std::string fleet = "preset:reference";
  std::string model = "preset:gpt2-125m";
  std::string workload;        // file; empty = standard preset workload
  std::string params;          // file; empty = per-model calibrated preset
  std::string thermal = "preset:reference";
  std::string thermal_policy;  // file; empty = defaults
  std::string guardrails;
  std::string health;
  std::string cost;
  std::string faults;
  std::uint64_t seed = 0;
  std::string governor = "on";
  std::string outcome_model = "latent";
  std::string out;
};

struct Scenario {
  es::PlanRequest req;
  es::ThermalModel thermal;
  es::ThermalPolicy thermal_policy;
  es::GuardrailPolicy guardrails;
  es::CostParams cost;
  es::FaultScript faults;
  es::SimOptions opts;
  std::filesystem::path out_dir;
};

std::string default_out_dir() {
  if (const char* env = std::getenv("EDGESIM_OUT")) return env;
  return ".";
}

void add_scenario_flags(CLI::App* cmd, ScenarioArgs& a) {
  cmd->add_option("--fleet", a.fleet, "Fleet file or preset:<name>");
  cmd->add_option("--model", a.model, "Model file or preset:<name>");
  cmd->add_option("--workload", a.workload, "Workload file (default: 20x100 single query)");
  cmd->add_option("--params", a.params, "Law-constants file (default: calibrated preset)");
  cmd->add_option("--thermal", a.thermal, "Thermal RC file or preset:<name>");
  cmd->add_option("--thermal-policy", a.thermal_policy, "Governor policy file");
  cmd->add_option("--guardrails", a.guardrails, "Guardrail policy file");
  cmd->add_option("--health", a.health, "Health-monitor config file");
  cmd->add_option("--cost", a.cost, "Cost parameters file");
  cmd->add_option("--faults", a.faults, "Fault script file");
  cmd->add_option("--seed", a.seed, "Master random seed");
  cmd->add_option("--governor", a.governor, "Thermal governor: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--outcome-model", a.outcome_model, "Sample outcome model: latent|uniform")
      ->check(CLI::IsMember({"latent", "uniform"}));
  cmd->add_option("--out", a.out, "Output directory (default: $EDGESIM_OUT or .)");
}

es::ThermalModel resolve_thermal(const std::string& ref) {
  if (ref == "preset:reference") return es::presets::reference_thermal();
  if (ref == "preset:thermal-stress") return es::presets::thermal_stress_profile();
  if (ref.rfind("preset:", 0) == 0)
    throw es::ConfigError("unknown thermal preset '" + ref +
                          "' (expected reference or thermal-stress)");
  return es::load_thermal(ref);
}

void require_valid(const std::vector<std::string>& violations, const std::string& what) {
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << what << " invalid:";
  for (const auto& v : violations) msg << "\n  - " << v;
  throw InputError(msg.str());
}

Scenario build_scenario(const ScenarioArgs& a) {
  Scenario s;
  s.req.fleet = es::resolve_fleet(a.fleet);
  s.req.model = es::resolve_model(a.model);
  s.req.workload = a.workload.empty() ? es::presets::standard_workload()
                                      : es::load_workload(a.workload);
  if (!a.params.empty()) {
    s.req.params = es::load_params(a.params);
  } else if (a.model.rfind("preset:", 0) == 0) {
    s.req.params = es::presets::params_for(a.model.substr(7));
  } else {
    // file-based models fall back to the 125M anchor calibration
    s.req.params = es::presets::params_for("gpt2-125m");
  }
  s.thermal = resolve_thermal(a.thermal);
  if (!a.thermal_policy.empty()) s.thermal_policy = es::load_thermal_policy(a.thermal_policy);
  if (!a.guardrails.empty()) s.guardrails = es::load_guardrails(a.guardrails);
  if (!a.health.empty()) s.opts.health = es::load_health(a.health);
  s.cost = a.cost.empty() ? es::presets::reference_cost() : es::load_cost(a.cost);
  if (!a.faults.empty()) s.faults = es::load_faults(a.faults);

  require_valid(es::validate_fleet(s.req.fleet), "fleet");
  require_valid(es::validate_model(s.req.model), "model");
  require_valid(es::validate_workload(s.req.workload), "workload");
  require_valid(es::validate_params(s.req.params), "params");
  require_valid(es::validate_thermal(s.thermal), "thermal model");
  require_valid(es::validate_policy(s.thermal_policy), "thermal policy");
  require_valid(es::validate_policy(s.guardrails), "guardrails");
  require_valid(es::validate_faults(s.faults, s.req.fleet), "fault script");

  s.opts.seed = a.seed;
  s.opts.governor_on = a.governor == "on";
  s.opts.outcome_model = a.outcome_model == "uniform" ? es::OutcomeModel::Uniform
                                                      : es::OutcomeModel::LatentDifficulty;
  s.out_dir = a.out.empty() ? default_out_dir() : a.out;
  return s;
}

void write_json(const std::filesystem::path& path, const json& j) {
  es::atomic_write(path.string(), j.dump(2) + "\n");
}

std::string metrics_csv(const es::MetricSet& m) {
  std::ostringstream head, row;
  row.precision(17);
  head << "schema_version,ipw,ece,ppp,energy_per_token,throughput";
  row << 1 << "," << m.ipw << "," << m.ece << "," << m.ppp << "," << m.energy_per_token << ","
      << m.throughput;
  for (const auto& [k, v] : m.pass_at_k) {
    head << ",pass_at_" << k;
    row << "," << v;
  }
  return head.str() + "\n" + row.str() + "\n";
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

// ---- plan ----

int cmd_plan(const ScenarioArgs& args, bool with_oracle) {
  Scenario s = build_scenario(args);
  auto [plan, diag] = es::greedy_plan(s.req);
  write_json(s.out_dir / "plan.json", es::plan_to_json(plan, s.req.model, &diag));
  if (with_oracle) {
    json oracle;
    try {
      es::AllocationPlan best = es::brute_force_plan(s.req);
      oracle = es::plan_to_json(best, s.req.model);
      oracle["greedy_within_optimal"] =
          best.safety_status == es::SafetyStatus::Infeasible ||
          plan.predicted_energy <= best.predicted_energy * (1.0 + 1e-9);
    } catch (const std::length_error& e) {
      oracle = json{{"error", e.what()}};
    }
    write_json(s.out_dir / "oracle.json", oracle);
  }
  if (plan.safety_status == es::SafetyStatus::Infeasible) {
    std::cerr << "plan infeasible; see " << (s.out_dir / "plan.json").string() << "\n";
    return kExitInfeasible;
  }
  std::cout << "plan: " << es::to_string(plan.safety_status) << ", "
            << plan.per_device_mem.size() << " device(s), predicted energy "
            << plan.predicted_energy << " J\n";
  return kExitOk;
}

// ---- simulate ----

struct RunOutput {
  es::AllocationPlan plan;
  es::SimReport report;
  es::MetricSet metrics;
};

RunOutput run_simulation(Scenario& s) {
  RunOutput out;
  es::PlanDiagnostics diag;
  std::tie(out.plan, diag) = es::greedy_plan(s.req);
  if (out.plan.safety_status == es::SafetyStatus::Infeasible) return out;
  out.report = es::simulate(out.plan, s.req, s.thermal, s.thermal_policy, s.guardrails, s.faults,
                            s.opts);
  const double energy_per_query =
      out.report.queries_completed > 0
          ? out.report.total_energy / static_cast<double>(out.report.queries_completed)
          : 0.0;
  const double cost_per_query =
      es::cost(s.cost, energy_per_query, s.req.workload.n_samples).total;
  out.metrics = es::compute_metrics(out.report, s.req.workload, cost_per_query);
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const Scenario& s, const RunOutput& r) {
  write_json(dir / "plan.json", es::plan_to_json(r.plan, s.req.model));
  write_json(dir / "report.json", es::report_to_json(r.report));
  write_json(dir / "metrics.json", es::metrics_to_json(r.metrics));
  es::atomic_write((dir / "metrics.csv").string(), metrics_csv(r.metrics));
  es::atomic_write((dir / "temperature_trace.csv").string(),
                   es::traces_to_csv(r.report.temperature_trace));
  es::atomic_write((dir / "utilization_trace.csv").string(),
                   es::traces_to_csv(r.report.utilization_trace));
  es::atomic_write((dir / "events.jsonl").string(), es::events_to_jsonl(r.report.events));
}

int cmd_simulate(const ScenarioArgs& args) {
  Scenario s = build_scenario(args);
  RunOutput r = run_simulation(s);
  if (r.plan.safety_status == es::SafetyStatus::Infeasible) {
    write_json(s.out_dir / "plan.json", es::plan_to_json(r.plan, s.req.model));
    std::cerr << "plan infeasible; nothing to simulate\n";
    return kExitInfeasible;
  }
  write_run_outputs(s.out_dir, s, r);
  std::cout << "simulated " << r.report.queries_completed << "/" << r.report.queries_submitted
            << " queries, energy " << r.report.total_energy << " J, makespan "
            << r.report.makespan << " s\n";
  return kExitOk;
}

// ---- fit ----

std::vector<std::pair<double, double>> parse_ranges(const std::string& spec) {
  std::vector<std::pair<double, double>> ranges;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw InputError("--ranges expects 'lo:hi[,lo:hi...]', got '" + item + "'");
    try {
      ranges.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InputError("--ranges: non-numeric bound in '" + item + "'");
    }
  }
  if (ranges.empty()) throw InputError("--ranges given but empty");
  return ranges;
}

int cmd_fit(const std::string& input, int bootstrap, std::uint64_t seed,
            const std::string& ranges_spec, const std::string& out) {
  es::CoverageCurve curve = es::load_curve_csv(input);
  require_valid(es::validate_curve(curve), "curve");
  es::FitResult fit;
  try {
    fit = es::fit_coverage(curve);
  } catch (const std::invalid_argument& e) {
    throw InsufficientData(e.what());
  }
  if (bootstrap > 0) {
    fit.ci_95 = es::bootstrap_ci(curve, bootstrap, seed);
    fit.n_bootstrap = bootstrap;
  }
  json j = es::fit_to_json(fit);
  j["label"] = curve.label;
  if (!ranges_spec.empty()) {
    const auto sens = es::range_sensitivity(curve, parse_ranges(ranges_spec));
    json jr = json::array();
    for (const auto& f : sens.fits)
      jr.push_back(json{{"s_min", f.s_min},
                        {"s_max", f.s_max},
                        {"ok", f.ok},
                        {"beta_hat", f.beta_hat},
                        {"note", f.note}});
    j["range_sensitivity"] = json{{"fits", jr}, {"delta_beta", sens.delta_beta}};
  }
  const std::filesystem::path dir = out.empty() ? default_out_dir() : out;
  write_json(dir / "fit.json", j);
  const std::string summary = es::fit_summary(curve.label, fit);
  es::atomic_write((dir / "fit.txt").string(), summary + "\n");
  std::cout << summary << "\n";
  return kExitOk;
}

// ---- sweep ----

struct SweepPoint {
  int index = 0;
  int n_samples = 0;            // 0 = not on this axis
  std::string device_subset;    // empty = full fleet; "all" allowed
  int governor_on = 1;
  std::string tag;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

es::DeviceFleet subset_fleet(const es::DeviceFleet& fleet, const std::string& subset) {
  if (subset.empty() || subset == "all") return fleet;
  es::DeviceFleet out;
  for (const auto& id : split(subset, '+')) {
    const es::DeviceSpec* d = fleet.find(id);
    if (!d) throw InputError("sweep device subset references unknown device '" + id + "'");
    out.devices.push_back(*d);
  }
  return out;
}

int cmd_sweep(const ScenarioArgs& args, const std::string& s_values,
              const std::string& device_subsets, bool sweep_governor, int jobs) {
  if (s_values.empty() && device_subsets.empty() && !sweep_governor)
    throw InputError("empty sweep: give --sweep-s, --sweep-devices and/or --sweep-governor");
  Scenario base = build_scenario(args);

  std::vector<int> s_axis;
  for (const auto& tok : s_values.empty() ? std::vector<std::string>{} : split(s_values, ',')) {
    try {
      s_axis.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InputError("--sweep-s: non-integer value '" + tok + "'");
    }
  }
  std::vector<std::string> dev_axis =
      device_subsets.empty() ? std::vector<std::string>{""} : split(device_subsets, '|');
  std::vector<int> gov_axis = sweep_governor ? std::vector<int>{1, 0}
                                             : std::vector<int>{args.governor == "on"};
  if (s_axis.empty()) s_axis.push_back(0);

  std::vector<SweepPoint> points;
  for (int sv : s_axis)
    for (const auto& dv : dev_axis)
      for (int gv : gov_axis) {
        SweepPoint p;
        p.index = static_cast<int>(points.size());
        p.n_samples = sv;
        p.device_subset = dv;
        p.governor_on = gv;
        std::ostringstream tag;
        if (sv > 0) tag << "s" << sv << "_";
        tag << (dv.empty() ? "all" : dv) << "_" << (gv ? "gov-on" : "gov-off");
        p.tag = tag.str();
        points.push_back(std::move(p));
      }

  // validate all subsets up front so a typo fails before any work runs
  for (const auto& p : points) subset_fleet(base.req.fleet, p.device_subset);

  struct PointResult {
    SweepPoint point;
    RunOutput run;
    es::WorkloadSpec workload;
    bool infeasible = false;
    std::string error;
  };
  std::vector<PointResult> results(points.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
      PointResult& r = results[i];
      r.point = points[i];
      try {
        Scenario s = base;
        s.req.fleet = subset_fleet(base.req.fleet, points[i].device_subset);
        if (points[i].n_samples > 0) s.req.workload.n_samples = points[i].n_samples;
        s.opts.governor_on = points[i].governor_on != 0;
        r.workload = s.req.workload;
        r.run = run_simulation(s);
        r.infeasible = r.run.plan.safety_status == es::SafetyStatus::Infeasible;
        if (!r.infeasible) {
          const auto dir = base.out_dir / ("point_" + points[i].tag);
          Scenario& sc = s;
          write_run_outputs(dir, sc, r.run);
        }
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  for (const auto& r : results)
    if (!r.error.empty()) throw InputError("sweep point " + r.point.tag + ": " + r.error);

  std::ostringstream csv;
  csv << "point,s,devices,governor,coverage,energy_j,avg_power_w,mean_latency_s,"
         "throughput_tok_s,ipw,ece,ppp,queries_lost\n";
  csv.precision(10);
  for (const auto& r : results) {
    csv << r.point.tag << "," << r.workload.n_samples << ","
        << (r.point.device_subset.empty() ? "all" : r.point.device_subset) << ","
        << (r.point.governor_on ? "on" : "off") << ",";
    if (r.infeasible) {
      csv << "infeasible,,,,,,,,\n";
      continue;
    }
    csv << es::observed_coverage(r.run.report.outcomes) << "," << r.run.report.total_energy << ","
        << r.run.report.avg_power << "," << mean(r.run.report.query_latency) << ","
        << r.run.metrics.throughput << "," << r.run.metrics.ipw << "," << r.run.metrics.ece << ","
        << r.run.metrics.ppp << "," << r.run.report.queries_lost << "\n";
  }
  es::atomic_write((base.out_dir / "sweep.csv").string(), csv.str());

  // an S-only sweep doubles as a coverage-curve experiment
  if (s_axis.size() >= 2 && dev_axis.size() == 1 && gov_axis.size() == 1) {
    es::CoverageCurve curve;
    curve.label = "sweep";
    for (const auto& r : results)
      if (!r.infeasible)
        curve.points.emplace_back(r.workload.n_samples,
                                  es::observed_coverage(r.run.report.outcomes));
    es::atomic_write((base.out_dir / "coverage_curve.csv").string(), es::curve_to_csv(curve));
  }

  // a two-point sweep is a paired comparison; emit the delta explicitly
  if (results.size() == 2 && !results[0].infeasible && !results[1].infeasible) {
    const auto& a = results[0];
    const auto& b = results[1];
    auto delta = [](double va, double vb) {
      return json{{"first", va},
                  {"second", vb},
                  {"delta", vb - va},
                  {"delta_pct", va != 0 ? (vb - va) / va * 100.0 : 0.0}};
    };
    write_json(base.out_dir / "delta.json",
               json{{"first", a.point.tag},
                    {"second", b.point.tag},
                    {"energy_j", delta(a.run.report.total_energy, b.run.report.total_energy)},
                    {"avg_power_w", delta(a.run.report.avg_power, b.run.report.avg_power)},
                    {"mean_latency_s",
                     delta(mean(a.run.report.query_latency), mean(b.run.report.query_latency))},
                    {"coverage", delta(es::observed_coverage(a.run.report.outcomes),
                                       es::observed_coverage(b.run.report.outcomes))},
                    {"ipw", delta(a.run.metrics.ipw, b.run.metrics.ipw)}});
  }

  int infeasible_count = 0;
  for (const auto& r : results) infeasible_count += r.infeasible;
  std::cout << "sweep: " << results.size() << " point(s), " << infeasible_count
            << " infeasible, results in " << base.out_dir.string() << "\n";
  return infeasible_count == static_cast<int>(results.size()) ? kExitInfeasible : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heterogeneous edge inference planner and simulator"};
  app.require_subcommand(1);

  ScenarioArgs plan_args;
  bool plan_oracle = false;
  CLI::App* plan_cmd = app.add_subcommand("plan", "Compute a layer-to-device allocation");
  add_scenario_flags(plan_cmd, plan_args);
  plan_cmd->add_flag("--oracle", plan_oracle, "Also run the exhaustive optimal search");

  ScenarioArgs sim_args;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Plan and run the event-driven simulation");
  add_scenario_flags(sim_cmd, sim_args);

  std::string fit_input, fit_ranges, fit_out;
  int fit_bootstrap = 0;
  std::uint64_t fit_seed = 0;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the coverage law to a CSV curve");
  fit_cmd->add_option("--input", fit_input, "CSV with columns s,coverage")->required();
  fit_cmd->add_option("--bootstrap", fit_bootstrap, "Bootstrap iterations for the CI");
  fit_cmd->add_option("--seed", fit_seed, "Bootstrap seed");
  fit_cmd->add_option("--ranges", fit_ranges, "Range sensitivity, e.g. 1:10,1:20");
  fit_cmd->add_option("--out", fit_out, "Output directory");

  ScenarioArgs sweep_args;
  std::string sweep_s, sweep_devices;
  bool sweep_governor = false;
  int sweep_jobs = 1;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a grid of simulations");
  add_scenario_flags(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--sweep-s", sweep_s, "Comma-separated sample budgets");
  sweep_cmd->add_option("--sweep-devices", sweep_devices,
                        "Device subsets: ids joined by '+', subsets by '|', or 'all'");
  sweep_cmd->add_flag("--sweep-governor", sweep_governor, "Sweep governor on and off");
  sweep_cmd->add_option("--jobs", sweep_jobs, "Concurrent sweep points")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(plan_args, plan_oracle);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (fit_cmd->parsed())
      return cmd_fit(fit_input, fit_bootstrap, fit_seed, fit_ranges, fit_out);
    if (sweep_cmd->parsed())
      return cmd_sweep(sweep_args, sweep_s, sweep_devices, sweep_governor, sweep_jobs);
  } catch (const InsufficientData& e) {
    std::cerr << "error: insufficient data: " << e.what() << "\n";
    return kExitInsufficient;
  } catch (const es::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
