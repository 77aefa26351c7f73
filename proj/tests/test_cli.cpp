#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "edgesim/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

fs::path scratch_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("edgesim-cli-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

CmdResult run_cli(const std::string& args) {
  static int n = 0;
  const fs::path cap = scratch_root() / ("cmd-" + std::to_string(n++) + ".log");
  const std::string cmd =
      std::string(EDGESIM_BIN) + " " + args + " > " + cap.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  CmdResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(cap);
  r.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return r;
}

std::string write_file(const std::string& name, const std::string& content) {
  const fs::path p = scratch_root() / name;
  std::ofstream(p) << content;
  return p.string();
}

std::string out_dir(const std::string& name) { return (scratch_root() / name).string(); }

json read_json(const fs::path& p) { return json::parse(edgesim::read_file(p.string())); }

}  // namespace

TEST_CASE("help and bad usage") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("plan --help").output.find("--fleet") != std::string::npos);
  CHECK(run_cli("frobnicate").code != 0);
}

TEST_CASE("plan writes the allocation and oracle verdict") {
  // two devices keeps the 14-layer exhaustive check inside its state guard
  const auto fleet = write_file("oracle_fleet.yaml", R"(
devices:
  - id: big
    kind: gpu
    mem_max: 8.0e9
    bandwidth: 4.5e11
    frequency: 1.5e9
    power_peak: 250
    n_cores: 4096
    lambda: 0.02
  - id: small
    kind: cpu
    mem_max: 1.6e10
    bandwidth: 1.0e11
    frequency: 2.8e9
    power_peak: 45
    n_cores: 8
    lambda: 1.0
)");
  const auto dir = out_dir("plan1");
  auto r = run_cli("plan --fleet " + fleet + " --model preset:gpt2-125m --oracle --out " + dir);
  CHECK(r.code == 0);
  json plan = read_json(fs::path(dir) / "plan.json");
  CHECK(plan["status"] == "ok");
  CHECK(plan["assignment"].size() == 14);  // embedding + 12 decoders + head
  json oracle = read_json(fs::path(dir) / "oracle.json");
  CHECK(oracle.contains("greedy_within_optimal"));
  CHECK(oracle["greedy_within_optimal"].get<bool>());
  CHECK(oracle["predicted"]["energy_joules"].get<double>() <=
        plan["predicted"]["energy_joules"].get<double>() * (1 + 1e-9));
}

TEST_CASE("unusable inputs exit 1") {
  CHECK(run_cli("plan --fleet /no/such/fleet.yaml").code == 1);
  CHECK(run_cli("plan --fleet preset:warehouse").code == 1);
  const auto broken = write_file("broken.yaml", "devices: [ { id: x } ]\n");
  auto r = run_cli("plan --fleet " + broken);
  CHECK(r.code == 1);
  CHECK(r.output.find("missing required field") != std::string::npos);

  // structurally valid but semantically invalid: negative sample count
  const auto bad_wl = write_file("bad_wl.yaml", "n_samples: 0\ntokens_per_sample: 100\n");
  CHECK(run_cli("plan --workload " + bad_wl).code == 1);
}

TEST_CASE("infeasible plans exit 2") {
  const auto micro = write_file("micro_fleet.yaml", R"(
devices:
  - id: tiny
    kind: cpu
    mem_max: 1.0e6
    bandwidth: 1.0e11
    frequency: 2.0e9
    power_peak: 10
    n_cores: 2
    lambda: 0.5
)");
  auto r = run_cli("plan --fleet " + micro + " --model preset:gpt2-125m --out " +
                   out_dir("plan_infeasible"));
  CHECK(r.code == 2);
  json plan = read_json(fs::path(out_dir("plan_infeasible")) / "plan.json");
  CHECK(plan["status"] == "infeasible");
}

TEST_CASE("simulate produces the full artifact set") {
  const auto dir = out_dir("sim1");
  auto r = run_cli("simulate --fleet preset:reference --model preset:gpt2-125m --seed 5 --out " +
                   dir);
  CHECK(r.code == 0);
  for (const char* f : {"plan.json", "report.json", "metrics.json", "metrics.csv",
                        "temperature_trace.csv", "utilization_trace.csv", "events.jsonl"})
    CHECK(fs::exists(fs::path(dir) / f));

  json rep = read_json(fs::path(dir) / "report.json");
  CHECK(rep["queries"]["completed"] == 1);
  CHECK(rep["energy"]["total"].get<double>() > 0);

  json met = read_json(fs::path(dir) / "metrics.json");
  CHECK(met["schema_version"] == 1);
  CHECK(met.contains("energy_per_token"));

  // metrics.csv: header plus exactly one row
  const std::string csv = edgesim::read_file((fs::path(dir) / "metrics.csv").string());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

  const std::string tr = edgesim::read_file((fs::path(dir) / "temperature_trace.csv").string());
  CHECK(tr.rfind("time_s,device_id,value\n", 0) == 0);
}

TEST_CASE("identical seeds produce byte-identical artifacts") {
  const std::string base =
      "simulate --fleet preset:edge-cluster --model preset:lfm2-2.6b --seed 42 --out ";
  CHECK(run_cli(base + out_dir("det_a")).code == 0);
  CHECK(run_cli(base + out_dir("det_b")).code == 0);
  for (const char* f : {"report.json", "metrics.json", "temperature_trace.csv", "events.jsonl"}) {
    const auto a = edgesim::read_file((fs::path(out_dir("det_a")) / f).string());
    const auto b = edgesim::read_file((fs::path(out_dir("det_b")) / f).string());
    CHECK(a == b);
  }
}

TEST_CASE("fit recovers the exponent from a csv curve") {
  std::string csv = "s,coverage\n";
  for (int s = 1; s <= 40; ++s) {
    const double c = 1.0 - std::exp(-0.111 * std::pow(s, 0.70));
    csv += std::to_string(s) + "," + std::to_string(c) + "\n";
  }
  const auto curve = write_file("curve.csv", csv);
  const auto dir = out_dir("fit1");
  auto r = run_cli("fit --input " + curve + " --bootstrap 200 --ranges 1:10,1:40 --out " + dir);
  CHECK(r.code == 0);
  CHECK(r.output.find("beta = 0.700") != std::string::npos);
  json fit = read_json(fs::path(dir) / "fit.json");
  CHECK(fit["beta_hat"].get<double>() == doctest::Approx(0.70).epsilon(1e-4));
  CHECK(fit["ci_95"].is_array());
  REQUIRE(fit.contains("range_sensitivity"));
  CHECK(fit["range_sensitivity"]["fits"].size() == 2);
  CHECK(fs::exists(fs::path(dir) / "fit.txt"));
}

TEST_CASE("underdetermined curves exit 3") {
  const auto curve = write_file("short.csv", "s,coverage\n1,0.2\n2,0.3\n");
  auto r = run_cli("fit --input " + curve + " --out " + out_dir("fit_short"));
  CHECK(r.code == 3);
  CHECK(r.output.find("3") != std::string::npos);  // explains the 3-point minimum
}

TEST_CASE("sample-budget sweep emits grid results and a coverage curve") {
  const auto wl = write_file("sweep_wl.yaml",
                             "n_samples: 20\ntokens_per_sample: 50\n"
                             "prompt_tokens: 32\nn_queries: 50\n");
  const auto dir = out_dir("sweep1");
  auto r = run_cli("sweep --fleet preset:reference --model preset:gpt2-125m --workload " + wl +
                   " --sweep-s 1,4,16 --seed 7 --out " + dir);
  CHECK(r.code == 0);

  const std::string csv = edgesim::read_file((fs::path(dir) / "sweep.csv").string());
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 points
  CHECK(csv.find("infeasible") == std::string::npos);

  auto curve = edgesim::load_curve_csv((fs::path(dir) / "coverage_curve.csv").string());
  REQUIRE(curve.points.size() == 3);
  // nested sampling: more samples never lower observed coverage
  CHECK(curve.points[0].second <= curve.points[1].second);
  CHECK(curve.points[1].second <= curve.points[2].second);

  for (const char* sub : {"point_s1_all_gov-on", "point_s4_all_gov-on", "point_s16_all_gov-on"})
    CHECK(fs::exists(fs::path(dir) / sub / "report.json"));
}

TEST_CASE("two-point sweeps include a delta summary") {
  const auto dir = out_dir("sweep2");
  auto r = run_cli(
      "sweep --fleet preset:reference --model preset:gpt2-125m --sweep-governor --seed 3 --out " +
      dir);
  CHECK(r.code == 0);
  json delta = read_json(fs::path(dir) / "delta.json");
  REQUIRE(delta.contains("energy_j"));
  CHECK(delta["energy_j"].contains("delta_pct"));
  CHECK(delta["first"] == "all_gov-on");
  CHECK(delta["second"] == "all_gov-off");
}

TEST_CASE("sweep without axes exits 1") {
  CHECK(run_cli("sweep --fleet preset:reference --model preset:gpt2-125m --out " +
                out_dir("sweep_none")).code == 1);
}

TEST_CASE("device-subset sweep rejects unknown ids") {
  auto r = run_cli(
      "sweep --fleet preset:edge-cluster --model preset:gpt2-125m "
      "--sweep-devices ec-npu0+ghost --out " +
      out_dir("sweep_bad"));
  CHECK(r.code == 1);
}
