#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edgesim/rng.hpp"
#include "edgesim/safety.hpp"

using namespace edgesim;

TEST_CASE("throttle multiplier boundary values are exact") {
  ThermalPolicy p;  // theta 0.85
  const double t_max = 100.0;
  CHECK(throttle_multiplier(p, 85.0, t_max) == 1.0);
  CHECK(throttle_multiplier(p, 100.0, t_max) == 0.0);
  CHECK(throttle_multiplier(p, 92.5, t_max) == 0.5);
}

TEST_CASE("throttle multiplier clamps and derates linearly") {
  ThermalPolicy p;
  CHECK(throttle_multiplier(p, 25.0, 100.0) == 1.0);
  CHECK(throttle_multiplier(p, 0.0, 100.0) == 1.0);
  CHECK(throttle_multiplier(p, 140.0, 100.0) == 0.0);
  CHECK(throttle_multiplier(p, 88.75, 100.0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(throttle_multiplier(p, -1.0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(throttle_multiplier(p, 50.0, 0.0), std::invalid_argument);
}

TEST_CASE("throttle multiplier is nonincreasing and bounded over random temps") {
  ThermalPolicy p;
  Rng rng = derive_rng(5, "throttle");
  for (int i = 0; i < 500; ++i) {
    const double t_max = rng.uniform(40.0, 120.0);
    const double a = rng.uniform(0.0, 1.5 * t_max);
    const double b = a + rng.uniform(0.0, 20.0);
    const double ma = throttle_multiplier(p, a, t_max);
    const double mb = throttle_multiplier(p, b, t_max);
    CHECK(ma >= 0.0);
    CHECK(ma <= 1.0);
    CHECK(mb <= ma);  // hotter never speeds up
    // continuity: small temperature steps move the multiplier by a small amount
    const double mc = throttle_multiplier(p, a + 1e-7, t_max);
    CHECK(std::abs(mc - ma) < 1e-5);
  }
}

TEST_CASE("thermal policy validation") {
  ThermalPolicy p;
  CHECK(validate_policy(p).empty());
  p.theta_throttle = 1.2;
  p.monitor_period_hot = 0;
  CHECK(validate_policy(p).size() >= 2);
  ThermalPolicy inverted;
  inverted.hot_threshold = 0.9;  // above theta
  CHECK(validate_policy(inverted).size() == 1);
}

TEST_CASE("guardrail policy validation") {
  GuardrailPolicy p;
  CHECK(validate_policy(p).empty());
  p.max_seq_len = 0;
  p.max_gen_factor = 1.0;
  p.repetition_fraction = 1.0;
  CHECK(validate_policy(p).size() == 3);
}

TEST_CASE("input validation verdicts") {
  GuardrailPolicy p;  // max_seq_len 4096, no rate limit
  InputRequest req;
  req.bytes = "what is the airspeed velocity of an unladen swallow";
  req.declared_tokens = 12;
  CHECK(!validate_input(p, req).has_value());

  SUBCASE("oversize") {
    req.declared_tokens = 5000;
    CHECK(validate_input(p, req) == RejectReason::Oversize);
  }

  SUBCASE("rate limit counts tokens over the arrival span") {
    p.token_rate_limit = 10.0;
    req.declared_tokens = 100;
    req.arrival_times = {0.0, 1.0, 2.0};  // 300 tokens / 2 s >> 10 tok/s
    CHECK(validate_input(p, req) == RejectReason::RateLimit);
    req.arrival_times = {0.0, 50.0};  // 200 tokens / 50 s = 4 tok/s
    CHECK(!validate_input(p, req).has_value());
  }

  SUBCASE("deterministic: same bytes and policy give the same verdict") {
    for (int i = 0; i < 3; ++i) CHECK(validate_input(p, req) == validate_input(p, req));
  }
}

TEST_CASE("utf-8 checks accept real text and reject malformed bytes") {
  GuardrailPolicy p;
  InputRequest req;
  req.declared_tokens = 4;

  for (const char* good : {"plain ascii", "caf\xC3\xA9", "\xE2\x82\xAC 5", "\xF0\x9F\x99\x82"}) {
    req.bytes = good;
    CHECK(!validate_input(p, req).has_value());
  }

  const std::string bad[] = {
      std::string("\xFF\xFE"),          // not a UTF-8 lead byte
      std::string("caf\xC3"),           // truncated sequence
      std::string("\xC0\xAF"),          // overlong encoding
      std::string("\xF5\x80\x80\x80"),  // beyond U+10FFFF
      std::string("\xE2\x28\xAC"),      // bad continuation byte
  };
  for (const auto& b : bad) {
    req.bytes = b;
    CHECK(validate_input(p, req) == RejectReason::Encoding);
  }
}

TEST_CASE("output halts on length cap and repetition") {
  GuardrailPolicy p;  // factor 2, window 100, fraction 0.90

  SUBCASE("length cap") {
    std::vector<int> toks;  // distinct tokens so only the cap can fire
    for (int i = 0; i < 199; ++i) toks.push_back(i);
    CHECK(!check_output(p, toks, 100).has_value());
    toks.push_back(199);  // 200 = 2 * 100
    CHECK(check_output(p, toks, 100) == HaltReason::LengthCap);
    CHECK(!check_output(p, toks, 0).has_value());  // unknown expectation: cap off
  }

  SUBCASE("repetition over the trailing window") {
    std::vector<int> toks;
    for (int i = 0; i < 60; ++i) toks.push_back(i);
    for (int i = 0; i < 90; ++i) toks.push_back(1234);
    // trailing 100: 90 repeats of 1234 -> 0.90, not > 0.90
    CHECK(!check_output(p, toks, 1000).has_value());
    toks.push_back(1234);  // now 91 of the trailing 100
    CHECK(check_output(p, toks, 1000) == HaltReason::Repetition);
  }

  SUBCASE("short outputs never trip the repetition rule") {
    std::vector<int> toks(99, 5);
    CHECK(!check_output(p, toks, 1000).has_value());
  }
}

TEST_CASE("error-rate rule arms only with a full window") {
  HealthTracker t;
  t.add_device("d", 0);
  // 20% errors but only 50 outcomes: silent
  for (int i = 0; i < 50; ++i) {
    Outcome o = (i % 5 == 0) ? Outcome{OutcomeError{}} : Outcome{OutcomeOk{}};
    CHECK(!t.observe_outcome("d", o, i * 0.1).has_value());
  }
  CHECK(t.status("d") == HealthStatus::Healthy);

  // flush with successes, then two errors inside a 100-wide window: 2% > 1%
  HealthTracker t2;
  t2.add_device("d", 0);
  for (int i = 0; i < 98; ++i) t2.observe_outcome("d", OutcomeOk{}, i * 0.1);
  CHECK(!t2.observe_outcome("d", OutcomeError{}, 9.8).has_value());  // 99 outcomes: not armed
  auto ev = t2.observe_outcome("d", OutcomeError{}, 9.9);
  REQUIRE(ev.has_value());
  CHECK(ev->to == HealthStatus::Failed);
  CHECK(ev->cause == "error_rate");
  CHECK(t2.status("d") == HealthStatus::Failed);
}

TEST_CASE("exactly one percent errors does not trip the strict rule") {
  HealthTracker t;
  t.add_device("d", 0);
  for (int i = 0; i < 99; ++i) t.observe_outcome("d", OutcomeOk{}, i * 0.1);
  CHECK(!t.observe_outcome("d", OutcomeError{}, 10.0).has_value());  // 1/100 == 1%
  CHECK(t.status("d") == HealthStatus::Healthy);
}

TEST_CASE("timeout rule uses the 10x factor strictly") {
  HealthTracker t;
  t.add_device("d", 0);
  CHECK(!t.observe_outcome("d", OutcomeTimeout{10.0, 1.0}, 1.0).has_value());  // exactly 10x
  auto ev = t.observe_outcome("d", OutcomeTimeout{10.1, 1.0}, 2.0);
  REQUIRE(ev.has_value());
  CHECK(ev->cause == "timeout");
  CHECK(t.status("d") == HealthStatus::Failed);
}

TEST_CASE("heartbeat failure after three missed beats") {
  HealthTracker t;
  t.add_device("a", 0);
  t.add_device("b", 0);
  t.heartbeat("a", 2.9);
  t.heartbeat("b", 2.9);
  CHECK(t.check_heartbeats(3.0).empty());
  t.heartbeat("a", 5.0);  // b goes silent
  auto evs = t.check_heartbeats(6.0);  // b last seen 2.9, 3.1 s > 3 * 1 s
  REQUIRE(evs.size() == 1);
  CHECK(evs[0].device == "b");
  CHECK(evs[0].cause == "heartbeat");
  CHECK(t.status("a") == HealthStatus::Healthy);
  CHECK(t.status("b") == HealthStatus::Failed);
  CHECK(t.healthy_count() == 1);
}

TEST_CASE("recovery passes through degraded with a linear ramp") {
  HealthConfig cfg;
  HealthTracker t(cfg);
  t.add_device("d", 0);
  t.check_heartbeats(10.0);  // silent since 0: fails
  REQUIRE(t.status("d") == HealthStatus::Failed);
  CHECK(t.capacity("d", 10.0) == 0.0);

  // recover() never jumps straight to Healthy
  auto ev = t.recover("d", 100.0);
  REQUIRE(ev.has_value());
  CHECK(ev->from == HealthStatus::Failed);
  CHECK(ev->to == HealthStatus::Degraded);
  CHECK(t.capacity("d", 100.0) == 0.5);
  CHECK(t.capacity("d", 130.0) == doctest::Approx(0.75));  // halfway through 60 s ramp

  CHECK(!t.advance("d", 130.0).has_value());
  CHECK(t.status("d") == HealthStatus::Degraded);
  auto done = t.advance("d", 160.0);
  REQUIRE(done.has_value());
  CHECK(done->cause == "ramp_complete");
  CHECK(t.status("d") == HealthStatus::Healthy);
  CHECK(t.capacity("d", 160.0) == 1.0);
}

TEST_CASE("recover is a no-op unless failed") {
  HealthTracker t;
  t.add_device("d", 0);
  CHECK(!t.recover("d", 1.0).has_value());
  CHECK(t.status("d") == HealthStatus::Healthy);
  CHECK_THROWS_AS(t.status("ghost"), std::out_of_range);
}

TEST_CASE("failed devices stop reporting outcomes") {
  HealthTracker t;
  t.add_device("d", 0);
  t.check_heartbeats(10.0);
  REQUIRE(t.status("d") == HealthStatus::Failed);
  CHECK(!t.observe_outcome("d", OutcomeError{}, 11.0).has_value());
  CHECK(t.check_heartbeats(20.0).empty());  // already failed, no duplicate event
}

TEST_CASE("degraded latency bound") {
  CHECK(degraded_latency_bound(2.0, 4, 3) == doctest::Approx(2.0 * 4.0 / 3.0));
  CHECK(degraded_latency_bound(1.5, 4, 4) == 1.5);
  CHECK_THROWS_AS(degraded_latency_bound(1.0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(degraded_latency_bound(1.0, 3, 4), std::invalid_argument);
}
