#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edgesim/presets.hpp"
#include "edgesim/types.hpp"

using namespace edgesim;

namespace {

ModelSpec tiny_model() {
  // 1e6 params at fp16 -> 2e6 weight bytes + 10% overhead = 2.2e6 bytes total
  ModelSpec m;
  m.name = "tiny";
  m.n_params = 1e6;
  auto add = [&](LayerRole r, int idx, double frac) {
    LayerSpec l;
    l.role = r;
    l.index = idx;
    l.mem_footprint = frac * 2.2e6;
    l.flops_per_token = frac * 2e6;
    m.layers.push_back(l);
  };
  add(LayerRole::Embedding, 0, 0.2);
  add(LayerRole::Decoder, 0, 0.3);
  add(LayerRole::Decoder, 1, 0.3);
  add(LayerRole::LMHead, 0, 0.2);
  return m;
}

DeviceSpec ok_device(const std::string& id) {
  DeviceSpec d;
  d.id = id;
  d.mem_max = 1e9;
  d.bandwidth = 100e9;
  d.frequency = 2e9;
  d.power_peak = 50;
  d.n_cores = 4;
  d.lambda = 0.5;
  return d;
}

}  // namespace

TEST_CASE("enum string round trips") {
  for (auto k : {DeviceKind::CPU, DeviceKind::GPU, DeviceKind::NPU})
    CHECK(device_kind_from_string(to_string(k)) == k);
  for (auto q : {Quantization::FP16, Quantization::FP8})
    CHECK(quantization_from_string(to_string(q)) == q);
  for (auto r : {LayerRole::Embedding, LayerRole::Decoder, LayerRole::LMHead})
    CHECK(layer_role_from_string(to_string(r)) == r);
  CHECK(device_kind_from_string("GPU") == DeviceKind::GPU);
  CHECK_THROWS_AS(device_kind_from_string("tpu"), std::invalid_argument);
  CHECK_THROWS_AS(quantization_from_string("int4"), std::invalid_argument);
  CHECK_THROWS_AS(layer_role_from_string("norm"), std::invalid_argument);
}

TEST_CASE("bytes per param by precision") {
  CHECK(bytes_per_param(Quantization::FP16) == 2.0);
  CHECK(bytes_per_param(Quantization::FP8) == 1.0);
}

TEST_CASE("device derived rates") {
  DeviceSpec d = ok_device("a");
  CHECK(d.compute_rate() == doctest::Approx(2.0 * 2e9 * 4));
  CHECK(d.efficiency() == doctest::Approx(2.0 * 2e9 * 4 / 50.0));
}

TEST_CASE("fleet lookup") {
  DeviceFleet f;
  f.devices = {ok_device("a"), ok_device("b")};
  CHECK(f.find("b") == &f.devices[1]);
  CHECK(f.find("zz") == nullptr);
  CHECK(f.at("a").id == "a");
  CHECK_THROWS_AS(f.at("zz"), std::out_of_range);
}

TEST_CASE("validate_fleet flags each broken field") {
  DeviceFleet f;
  CHECK(validate_fleet(f).size() == 1);  // empty fleet

  f.devices = {ok_device("a"), ok_device("a")};
  auto v = validate_fleet(f);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("duplicate") != std::string::npos);

  DeviceSpec bad = ok_device("b");
  bad.mem_max = 0;
  bad.lambda = 1.5;
  bad.n_cores = 0;
  bad.t_ambient = 95;  // >= 0.85 * t_max = 85
  f.devices = {bad};
  v = validate_fleet(f);
  CHECK(v.size() == 4);
}

TEST_CASE("validate_fleet accepts the shipped presets") {
  CHECK(validate_fleet(presets::reference_fleet()).empty());
  CHECK(validate_fleet(presets::edge_cluster_fleet()).empty());
  CHECK(validate_fleet(presets::thermal_stress_fleet()).empty());
}

TEST_CASE("validate_model accepts a consistent model") {
  CHECK(validate_model(tiny_model()).empty());
  for (const auto& n : presets::model_names()) CHECK(validate_model(presets::model(n)).empty());
}

TEST_CASE("validate_model catches structural problems") {
  ModelSpec m = tiny_model();
  m.layers.erase(m.layers.begin());  // drop embedding
  auto v = validate_model(m);
  REQUIRE(!v.empty());
  CHECK(v[0].find("embedding") != std::string::npos);

  m = tiny_model();
  m.layers[2].index = 5;  // decoder indices 0, 5
  v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("contiguous") != std::string::npos);

  m = tiny_model();
  m.layers[1].mem_footprint = 0;
  CHECK(!validate_model(m).empty());
}

TEST_CASE("validate_model cross-checks footprint against parameter count") {
  ModelSpec m = tiny_model();
  for (auto& l : m.layers) l.mem_footprint *= 2.0;  // pretends fp32 weights
  auto v = validate_model(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("inconsistent") != std::string::npos);

  // within the 10% tolerance: fine
  m = tiny_model();
  for (auto& l : m.layers) l.mem_footprint *= 1.05;
  CHECK(validate_model(m).empty());
}

TEST_CASE("validate_workload bounds") {
  WorkloadSpec w;
  w.n_samples = 20;
  w.tokens_per_sample = 100;
  CHECK(validate_workload(w).empty());
  w.n_samples = 0;
  w.tokens_per_sample = 0;
  w.prompt_tokens = -1;
  w.coverage_min = 1.5;
  CHECK(validate_workload(w).size() == 4);
}

TEST_CASE("layer_inventory canonical order") {
  ModelSpec m = tiny_model();
  // scramble declaration order; inventory must still be emb, dec0, dec1, head
  std::swap(m.layers[0], m.layers[3]);
  std::swap(m.layers[1], m.layers[2]);
  auto inv = layer_inventory(m);
  REQUIRE(inv.size() == 4);
  CHECK(inv[0].role == LayerRole::Embedding);
  CHECK(inv[1].role == LayerRole::Decoder);
  CHECK(inv[1].index == 0);
  CHECK(inv[2].index == 1);
  CHECK(inv[3].role == LayerRole::LMHead);
}

TEST_CASE("layer_inventory rejects broken structure") {
  ModelSpec m = tiny_model();
  m.layers[1].role = LayerRole::Embedding;  // second embedding
  CHECK_THROWS_AS(layer_inventory(m), std::invalid_argument);
  ModelSpec no_head = tiny_model();
  no_head.layers.pop_back();
  CHECK_THROWS_AS(layer_inventory(no_head), std::invalid_argument);
}

TEST_CASE("model derived quantities") {
  ModelSpec m = tiny_model();
  CHECK(m.flops_per_token() == doctest::Approx(2e6));  // defaults to 2 * n_params
  m.flops_per_token_total = 5e6;
  CHECK(m.flops_per_token() == 5e6);
  CHECK(m.total_bytes() == doctest::Approx(2.2e6));
}
