#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "stealshare/error.hpp"
#include "stealshare/qbd.hpp"
#include "stealshare/sim.hpp"

using namespace stealshare;

namespace {

void check_error(ErrorKind want, const std::function<void()>& f) {
  try {
    f();
    FAIL_CHECK("expected an error of kind " << to_string(want));
  } catch (const Error& e) {
    CHECK(e.kind() == want);
  }
}

SimConfig small_config(Strategy strategy) {
  return SimConfig{.dist = erlang(5),
                   .lambda = 0.5,
                   .r = 0.2,
                   .strategy = strategy,
                   .n_servers = 200,
                   .horizon = 800,
                   .warmup_fraction = 0.25,
                   .runs = 4,
                   .seed = 7,
                   .force = false};
}

}  // namespace

TEST_CASE("student-t critical values") {
  CHECK(t_quantile_975(1) == 12.706);
  CHECK(t_quantile_975(19) == 2.093);
  CHECK(t_quantile_975(30) == 2.042);
  CHECK(t_quantile_975(45) == doctest::Approx(2.01575).epsilon(1e-12));
  CHECK(t_quantile_975(120) == doctest::Approx(1.980).epsilon(1e-12));
  CHECK(t_quantile_975(5000) == 1.96);
  check_error(ErrorKind::invalid_parameter, [] { t_quantile_975(0); });
}

TEST_CASE("identical configurations give identical results") {
  const SimConfig cfg = small_config(Strategy::steal);
  const SimReport a = simulate(cfg);
  const SimReport b = simulate(cfg);
  CHECK(a.mean_response == b.mean_response);
  CHECK(a.ci_halfwidth == b.ci_halfwidth);
  REQUIRE(a.per_run_means.size() == b.per_run_means.size());
  for (size_t i = 0; i < a.per_run_means.size(); ++i) {
    CHECK(a.per_run_means[i] == b.per_run_means[i]);
  }
  CHECK(a.observed_overall_probe_rate == b.observed_overall_probe_rate);

  SimConfig other = cfg;
  other.seed = 8;
  CHECK(simulate(other).mean_response != a.mean_response);
}

TEST_CASE("configuration validation") {
  SimConfig cfg = small_config(Strategy::steal);
  cfg.runs = 1;
  cfg.n_servers = 50;
  cfg.horizon = 50;

  auto expect = [&](ErrorKind kind, auto mutate) {
    SimConfig bad = cfg;
    mutate(bad);
    check_error(kind, [&] { simulate(bad); });
  };
  expect(ErrorKind::invalid_parameter,
         [](SimConfig& c) { c.lambda = 0.0; });
  expect(ErrorKind::stability, [](SimConfig& c) { c.lambda = 1.0; });
  expect(ErrorKind::invalid_parameter, [](SimConfig& c) { c.r = -1.0; });
  expect(ErrorKind::invalid_parameter, [](SimConfig& c) { c.r = 2e6; });
  expect(ErrorKind::invalid_parameter,
         [](SimConfig& c) { c.n_servers = 1; });
  expect(ErrorKind::invalid_parameter, [](SimConfig& c) { c.horizon = 0; });
  expect(ErrorKind::invalid_parameter,
         [](SimConfig& c) { c.warmup_fraction = 1.0; });
  expect(ErrorKind::invalid_parameter, [](SimConfig& c) { c.runs = 0; });
  expect(ErrorKind::invalid_parameter,
         [](SimConfig& c) { c.dist = hypoexp(std::vector<double>{1.0, 1.0}); });

  // A window too short to complete anything is reported, not averaged.
  expect(ErrorKind::insufficient_data, [](SimConfig& c) {
    c.n_servers = 2;
    c.horizon = 1e-3;
    c.warmup_fraction = 0.9;
  });

  // force unlocks overloaded runs (they still complete jobs).
  SimConfig forced = cfg;
  forced.lambda = 1.2;
  forced.force = true;
  forced.n_servers = 20;
  forced.horizon = 30;
  const SimReport rep = simulate(forced);
  CHECK(rep.runs.at(0).jobs_completed > 0);
  CHECK(rep.mean_response > 1.0);
}

TEST_CASE("single run reports degenerate confidence") {
  SimConfig cfg = small_config(Strategy::steal);
  cfg.runs = 1;
  const SimReport rep = simulate(cfg);
  CHECK(rep.ci_halfwidth == 0.0);
  CHECK(rep.per_run_means.size() == 1);
  CHECK(rep.runs.size() == 1);
  CHECK(rep.mean_response == rep.per_run_means[0]);
  CHECK(rep.seed == cfg.seed);
  const RunResult& r0 = rep.runs[0];
  CHECK(r0.jobs_completed > 1000);
  CHECK(r0.littles_residual < 0.05);
  CHECK(r0.mean_queue_length > 0.0);
}

TEST_CASE("without probing every queue is a plain single-server queue") {
  SimConfig cfg = small_config(Strategy::steal);
  cfg.r = 0.0;
  cfg.runs = 3;
  const SimReport rep = simulate(cfg);
  const double pk =
      oracle::mg1_mean_response(cfg.lambda, cfg.dist.second_moment());
  CHECK(std::abs(rep.mean_response - pk) / pk < 0.03);
  CHECK(rep.observed_overall_probe_rate == 0.0);
  CHECK(rep.transfer_count_rate == 0.0);
}

TEST_CASE("probe rates follow the policy that emits them") {
  // Stealing: only idle servers probe, so the overall rate is r * P[idle].
  const SimConfig steal = small_config(Strategy::steal);
  const SimReport srep = simulate(steal);
  const double idle_rate = steal.r * (1.0 - steal.lambda);
  CHECK(std::abs(srep.observed_overall_probe_rate - idle_rate) / idle_rate <
        0.05);

  // Sharing: servers with a waiting job probe, so the rate is
  // r * P[len >= 2] at the sharing fixed point.
  const SimConfig share = small_config(Strategy::share);
  const SimReport hrep = simulate(share);
  const double tail2 =
      solve(share.dist, share.lambda, share.r).tail_prob(2);
  CHECK(std::abs(hrep.observed_overall_probe_rate - share.r * tail2) /
            (share.r * tail2) <
        0.10);

  // Every successful steal moves a job from a length >= 2 queue to an idle
  // one, so transfers happen at most as often as probes.
  CHECK(srep.transfer_count_rate > 0.0);
  CHECK(srep.transfer_count_rate < srep.observed_overall_probe_rate);

  // The convenience helper is the same deterministic number.
  CHECK(observed_probe_rate(steal) == srep.observed_overall_probe_rate);
}

TEST_CASE("queue-length fractions track the fixed point") {
  const SimConfig cfg = small_config(Strategy::steal);
  const SimReport rep = simulate(cfg);
  const QbdSolution sol = solve(cfg.dist, cfg.lambda, cfg.r);
  for (int k = 1; k <= kSimTailDepth; ++k) {
    CAPTURE(k);
    CHECK(std::abs(rep.frac_len_ge[k - 1] - sol.tail_prob(k)) < 0.01);
  }
  CHECK(std::abs(rep.mean_queue_length -
                 cfg.lambda * rep.mean_response) < 0.02);
  CHECK(rep.littles_law_residual < 0.02);
  // Response times sit near the fixed-point mean even at this small size.
  CHECK(std::abs(rep.mean_response - sol.mean_response()) /
            sol.mean_response() <
        0.05);
}

TEST_CASE("policy names") {
  CHECK(std::string(to_string(Strategy::steal)) == "steal");
  CHECK(std::string(to_string(Strategy::share)) == "share");
}
