#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "oracles.hpp"
#include "stealshare/error.hpp"
#include "stealshare/qbd.hpp"

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

const std::vector<double> kLambdas{0.3, 0.5, 0.8};
const std::vector<double> kRates{0.1, 1.0, 5.0};

}  // namespace

TEST_CASE("exponential jobs reproduce the scalar closed forms") {
  const PhaseTypeDist exp1 = exponential();
  for (double lambda : kLambdas) {
    for (double r : kRates) {
      CAPTURE(lambda);
      CAPTURE(r);
      const QbdSolution sol = solve(exp1, lambda, r);
      const double R = oracle::exp_R(lambda, r);
      CHECK(sol.R()(0, 0) == doctest::Approx(R).epsilon(1e-12));
      CHECK(sol.G()(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
      for (int i = 0; i <= 6; ++i) {
        CHECK(sol.tail_prob(i) ==
              doctest::Approx(oracle::exp_tail(lambda, r, i)).epsilon(1e-11));
      }
      CHECK(sol.mean_response() ==
            doctest::Approx(oracle::exp_mean_response(lambda, r))
                .epsilon(1e-11));
      CHECK(sol.lambda0() ==
            doctest::Approx(oracle::exp_lambda0(lambda, r)).epsilon(1e-11));
      CHECK(sol.pi0() == doctest::Approx(1.0 - lambda).epsilon(1e-14));
    }
  }
}

TEST_CASE("G is the phase map of a first passage down") {
  for (const PhaseTypeDist& dist :
       {erlang(5), fit_hyperexp(5.0, 0.5),
        hypoexp(std::vector<double>{3.0, 1.5})}) {
    // Without removals the level only drops at a completion, so the phase
    // after the drop is drawn fresh from alpha regardless of the start.
    const QbdSolution at0 = solve(dist, 0.7, 0.0);
    const Eigen::MatrixXd expect =
        Eigen::VectorXd::Ones(dist.num_phases()) * dist.alpha();
    CHECK((at0.G() - expect).cwiseAbs().maxCoeff() < 1e-10);

    // With an overwhelming removal rate the drop is almost surely a
    // removal, which leaves the service phase untouched.
    const QbdSolution atBig = solve(dist, 0.7, kRMax);
    CHECK((atBig.G() - Eigen::MatrixXd::Identity(dist.num_phases(),
                                                 dist.num_phases()))
              .cwiseAbs()
              .maxCoeff() < 1e-4);

    // G is stochastic for any positive-recurrent setting.
    for (double r : kRates) {
      const QbdSolution sol = solve(dist, 0.7, r);
      CHECK((sol.G().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
      CHECK(sol.G().minCoeff() > -1e-12);
    }
  }
}

TEST_CASE("two-phase mixtures match the eliminated cubic") {
  for (double scv : {5.0, 25.0}) {
    const PhaseTypeDist d = fit_hyperexp(scv, 0.5);
    for (double lambda : {0.5, 0.875}) {
      for (double r : {0.2, 1.0, 5.0}) {
        CAPTURE(scv);
        CAPTURE(lambda);
        CAPTURE(r);
        const QbdSolution sol = solve(d, lambda, r);
        const oracle::HyperexpG g = oracle::hyperexp_g(
            d.alpha()(0), -d.S()(0, 0), -d.S()(1, 1), lambda, r);
        CHECK(std::abs(sol.G()(1, 0) - g.g21) < 1e-9);
        CHECK(std::abs(sol.G()(0, 1) - g.g12) < 1e-9);
      }
    }
  }
}

TEST_CASE("solver diagnostics certify the fixed points") {
  for (double lambda : kLambdas) {
    for (double r : kRates) {
      const QbdSolution sol = solve(fit_hyperexp(25.0, 0.5), lambda, r);
      CAPTURE(lambda);
      CAPTURE(r);
      CHECK(sol.diagnostics().g_residual < 1e-10);
      CHECK(sol.diagnostics().r_residual < 1e-9);
      CHECK(sol.diagnostics().coupling_residual < 1e-9);
      CHECK(sol.diagnostics().spectral_radius_R < 1.0);
      CHECK(lambda0_consistency(sol) < 1e-9);
    }
  }
}

TEST_CASE("busy fraction and busy-phase split") {
  // The server is busy a fraction lambda of the time (removals only take
  // waiting jobs, so throughput is lambda and service rate while busy is
  // 1/mean = 1); the phase split while busy is the stationary busy-phase
  // vector, independent of r.
  for (const PhaseTypeDist& dist : {erlang(5), fit_hyperexp(10.0, 0.1)}) {
    const Eigen::RowVectorXd beta = dist.busy_phase_vector();
    for (double r : kRates) {
      const QbdSolution sol = solve(dist, 0.6, r);
      CHECK(sol.tail_prob(1) == doctest::Approx(0.6).epsilon(1e-10));
      CHECK((sol.tail_vector(1) - 0.6 * beta).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("level probabilities and tails form a partition") {
  const QbdSolution sol = solve(fit_hyperexp(5.0, 0.5), 0.85, 0.5);
  double total = sol.pi0();
  for (int level = 1; level <= 60; ++level) {
    total += sol.pi_level(level).sum();
  }
  total += sol.tail_prob(61);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.tail_prob(0) == doctest::Approx(1.0).epsilon(1e-12));

  // tail_vector(k) sums to tail_prob(k) and tails decrease in k.
  for (int k = 1; k <= 8; ++k) {
    CHECK(sol.tail_vector(k).sum() ==
          doctest::Approx(sol.tail_prob(k)).epsilon(1e-12));
    CHECK(sol.tail_prob(k) <= sol.tail_prob(k - 1) + 1e-15);
  }
}

TEST_CASE("no removals reduces to the M/G/1 mean response") {
  for (const PhaseTypeDist& dist :
       {exponential(), erlang(5), fit_hyperexp(5.0, 0.5),
        fit_hyperexp(25.0, 0.5)}) {
    for (double lambda : kLambdas) {
      const QbdSolution sol = solve(dist, lambda, 0.0);
      CHECK(sol.mean_response() ==
            doctest::Approx(
                oracle::mg1_mean_response(lambda, dist.second_moment()))
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("idle-exit rate matches the flow balance form") {
  // lambda0 = lambda + r * P[len >= 2]: everything the removal stream
  // deletes must re-enter through the idle state.
  for (const PhaseTypeDist& dist :
       {exponential(), erlang(5), fit_hyperexp(5.0, 0.5)}) {
    for (double lambda : kLambdas) {
      for (double r : kRates) {
        const QbdSolution sol = solve(dist, lambda, r);
        CHECK(sol.lambda0() ==
              doctest::Approx(lambda + r * sol.tail_prob(2)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("global balance holds far up the level chain") {
  for (const PhaseTypeDist& dist : {erlang(5), fit_hyperexp(25.0, 0.5)}) {
    const QbdSolution sol = solve(dist, 7.0 / 8.0, 5.0);
    CHECK(balance_residual(sol, 50) < 1e-8);
  }
}

TEST_CASE("mean queue length obeys Little consistency") {
  const QbdSolution sol = solve(erlang(5), 0.5, 0.2);
  // E[Q] also equals sum of tail probabilities.
  double by_tails = 0;
  for (int k = 1; k <= 400; ++k) by_tails += sol.tail_prob(k);
  CHECK(sol.mean_queue_length() == doctest::Approx(by_tails).epsilon(1e-10));
  CHECK(sol.mean_response() ==
        doctest::Approx(sol.mean_queue_length() / 0.5).epsilon(1e-14));
}

TEST_CASE("domain validation") {
  const PhaseTypeDist exp1 = exponential();
  check_error(ErrorKind::stability, [&] { solve(exp1, 1.0, 1.0); });
  check_error(ErrorKind::stability, [&] { solve(exp1, 1.7, 1.0); });
  check_error(ErrorKind::stability,
              [&] { solve(exp1, std::nan(""), 1.0); });
  check_error(ErrorKind::invalid_parameter, [&] { solve(exp1, 1e-9, 1.0); });
  check_error(ErrorKind::invalid_parameter, [&] { solve(exp1, 0.5, -0.5); });
  check_error(ErrorKind::invalid_parameter,
              [&] { solve(exp1, 0.5, 2e6); });
  check_error(ErrorKind::invalid_parameter, [&] {
    solve(hypoexp(std::vector<double>{1.0, 1.0}), 0.5, 1.0);  // mean 2
  });
  const QbdSolution sol = solve(exp1, 0.5, 1.0);
  check_error(ErrorKind::invalid_parameter, [&] { sol.pi_level(0); });
  check_error(ErrorKind::invalid_parameter, [&] { sol.tail_prob(-1); });
  check_error(ErrorKind::invalid_parameter, [&] { sol.tail_vector(0); });
  check_error(ErrorKind::invalid_parameter,
              [&] { balance_residual(sol, 0); });
}
