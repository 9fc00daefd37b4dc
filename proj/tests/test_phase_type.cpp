#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "stealshare/error.hpp"
#include "stealshare/phase_type.hpp"

#include "oracles.hpp"

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

}  // namespace

TEST_CASE("exponential is the one-phase unit-rate distribution") {
  const PhaseTypeDist d = exponential();
  CHECK(d.num_phases() == 1);
  CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.scv() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.hazard_class() == HazardClass::constant);
  CHECK(d.is_dhr());
  CHECK(d.is_ihr());
  CHECK(d.exit_rates()(0) == doctest::Approx(1.0));
}

TEST_CASE("erlang stages give mean 1 and scv 1/k") {
  for (int k : {1, 2, 5, 10, 50}) {
    const PhaseTypeDist d = erlang(k);
    CHECK(d.num_phases() == k);
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.scv() == doctest::Approx(1.0 / k).epsilon(1e-12));
    CHECK(d.is_ihr());
    if (k > 1) {
      CHECK(d.hazard_class() == HazardClass::increasing);
      CHECK_FALSE(d.is_dhr());
    }
  }
  check_error(ErrorKind::invalid_parameter, [] { erlang(0); });
}

TEST_CASE("two-moment hyperexponential fit matches frozen parameters") {
  for (const auto& row : oracle::kFitRows) {
    const PhaseTypeDist d = fit_hyperexp(row.scv, row.f);
    REQUIRE(d.num_phases() == 2);
    CHECK(d.alpha()(0) == doctest::Approx(row.p1).epsilon(5e-6));
    CHECK(-1.0 / d.S()(0, 0) == doctest::Approx(row.inv_mu1).epsilon(5e-6));
    CHECK(-1.0 / d.S()(1, 1) == doctest::Approx(row.inv_mu2).epsilon(5e-6));
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(d.scv() == doctest::Approx(row.scv).epsilon(1e-10));
    CHECK(d.hazard_class() == HazardClass::decreasing);
    CHECK(d.is_dhr());
    CHECK_FALSE(d.is_ihr());
  }
}

TEST_CASE("fit at scv 1 degenerates to the exponential") {
  const PhaseTypeDist d = fit_hyperexp(1.0, 0.3);
  CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.scv() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.hazard_class() == HazardClass::constant);
}

TEST_CASE("fit rejects bad moment targets") {
  check_error(ErrorKind::invalid_parameter, [] { fit_hyperexp(0.5, 0.5); });
  check_error(ErrorKind::invalid_parameter, [] { fit_hyperexp(5.0, 0.0); });
  check_error(ErrorKind::invalid_parameter, [] { fit_hyperexp(5.0, 1.0); });
}

TEST_CASE("hypoexp with equal rates equals the erlang chain") {
  const PhaseTypeDist h = hypoexp(std::vector<double>{2.0, 2.0});
  const PhaseTypeDist e = erlang(2);
  CHECK(h.mean() == doctest::Approx(e.mean()).epsilon(1e-12));
  CHECK(h.scv() == doctest::Approx(e.scv()).epsilon(1e-12));
  CHECK(h.hazard_class() == HazardClass::increasing);
  for (double s : {0.1, 0.7, 2.0}) {
    CHECK(h.laplace(s) == doctest::Approx(e.laplace(s)).epsilon(1e-12));
  }
}

TEST_CASE("laplace transform closed forms") {
  const PhaseTypeDist e = exponential();
  const PhaseTypeDist g5 = erlang(5);
  for (double s : {0.0, 0.25, 1.0, 3.0}) {
    CHECK(e.laplace(s) == doctest::Approx(1.0 / (1.0 + s)).epsilon(1e-12));
    CHECK(g5.laplace(s) ==
          doctest::Approx(std::pow(5.0 / (5.0 + s), 5)).epsilon(1e-12));
  }
  const PhaseTypeDist h = fit_hyperexp(5.0, 0.5);
  CHECK(h.laplace(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncated mean agrees with the transform identity") {
  // E[min(X, Exp(r))] = (1 - g(r))/r for every phase-type X.
  for (const PhaseTypeDist& d :
       {exponential(), erlang(5), fit_hyperexp(5.0, 0.5),
        fit_hyperexp(25.0, 0.5), hypoexp(std::vector<double>{3.0, 1.5})}) {
    for (double r : {0.2, 1.0, 4.0}) {
      CHECK(d.exp_min_mean(r) ==
            doctest::Approx((1.0 - d.laplace(r)) / r).epsilon(1e-11));
    }
    CHECK(d.exp_min_mean(0.0) == doctest::Approx(d.mean()).epsilon(1e-11));
  }
  CHECK(exponential().exp_min_mean(1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("busy-phase vector solves beta (S + mu alpha) = 0") {
  for (const PhaseTypeDist& d :
       {exponential(), erlang(5), fit_hyperexp(5.0, 0.5),
        hypoexp(std::vector<double>{3.0, 1.5})}) {
    const Eigen::RowVectorXd beta = d.busy_phase_vector();
    CHECK(beta.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(beta.minCoeff() >= -1e-12);
    const Eigen::MatrixXd gen = d.S() + d.exit_rates() * d.alpha();
    CHECK((beta * gen).cwiseAbs().maxCoeff() < 1e-10);
    // Mean-1 job sizes: the busy-phase completion rate is 1.
    CHECK(beta.dot(d.exit_rates()) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("shape validation rejects malformed generators") {
  Eigen::RowVectorXd a(2);
  a << 0.5, 0.5;
  Eigen::MatrixXd S(2, 2);

  S << -1, 2, 0, -1;  // row sum positive
  check_error(ErrorKind::unsupported_shape,
              [&] { PhaseTypeDist(a, S); });

  S << -1, -0.5, 0, -1;  // negative off-diagonal
  check_error(ErrorKind::unsupported_shape,
              [&] { PhaseTypeDist(a, S); });

  S << 1, 0, 0, -1;  // positive diagonal
  check_error(ErrorKind::unsupported_shape,
              [&] { PhaseTypeDist(a, S); });

  Eigen::RowVectorXd bad_a(2);
  bad_a << 0.7, 0.5;  // does not sum to 1
  S << -1, 0, 0, -1;
  check_error(ErrorKind::unsupported_shape,
              [&] { PhaseTypeDist(bad_a, S); });

  S << -1, 1, 1, -1;  // no exit anywhere: absorption never happens
  check_error(ErrorKind::numeric_failure, [&] { PhaseTypeDist(a, S); });
}

TEST_CASE("hyperexp constructor checks probabilities") {
  const std::vector<double> p{0.6, 0.4};
  const std::vector<double> mu{2.0, 0.5};
  const PhaseTypeDist d = hyperexp(p, mu);
  CHECK(d.mean() == doctest::Approx(0.6 / 2.0 + 0.4 / 0.5).epsilon(1e-12));
  check_error(ErrorKind::invalid_parameter, [&] {
    hyperexp(std::vector<double>{0.6, 0.6}, mu);
  });
}
