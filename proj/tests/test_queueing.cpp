#include <doctest.h>

#include <cmath>
#include <random>

#include "bikeinv/queueing.hpp"

using namespace bikeinv;

namespace {

RateSeries hourly(std::initializer_list<double> mu, std::initializer_list<double> lambda) {
  RateSeries r;
  r.interval_minutes = 60;
  r.pickups = Eigen::Map<const Eigen::VectorXd>(mu.begin(), static_cast<Eigen::Index>(mu.size()));
  r.returns = Eigen::Map<const Eigen::VectorXd>(lambda.begin(), static_cast<Eigen::Index>(lambda.size()));
  return r;
}

RateSeries random_rates(std::mt19937_64& rng, Eigen::Index n, double max_rate) {
  std::uniform_real_distribution<double> u(0.0, max_rate);
  RateSeries r;
  r.pickups.resize(n);
  r.returns.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    r.pickups[k] = u(rng);
    r.returns[k] = u(rng);
  }
  return r;
}

}  // namespace

TEST_CASE("transient_probabilities examples") {
  SUBCASE("no events keeps the start level") {
    const auto t = transient_probabilities(constant_rates<double>(24, 60, 0.0, 0.0), 3, 10);
    CHECK((t.probs.col(3).array() == 1.0).all());
  }
  SUBCASE("pure birth into one dock") {
    const auto t = transient_probabilities(hourly({0.0}, {1.0}), 0, 1);
    CHECK(t.final_distribution()[1] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
    CHECK(std::abs(t.final_distribution()[1] - 0.63212) < 1e-5);
  }
  SUBCASE("two-hour piecewise instance against explicit exponentials") {
    const auto rates = hourly({2.0, 1.0}, {1.0, 3.0});
    const auto t = transient_probabilities(rates, 1, 3);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    e[1] = 1.0;
    const Eigen::MatrixXd q1 = generator_matrix(2.0, 1.0, 3);
    const Eigen::MatrixXd q2 = generator_matrix(1.0, 3.0, 3);
    const Eigen::VectorXd expect = q2.exp() * (q1.exp() * e);
    CHECK((t.final_distribution() - expect).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(transient_probabilities(hourly({1.0}, {1.0}), 4, 3), DomainError);
    CHECK_THROWS_AS(transient_probabilities(hourly({1.0}, {1.0}), -1, 3), DomainError);
    CHECK_THROWS_AS(transient_probabilities(hourly({-1.0}, {1.0}), 0, 3), DomainError);
  }
}

TEST_CASE("matrix_exponential_oracle examples") {
  SUBCASE("zero rates") {
    const auto t = matrix_exponential_oracle(constant_rates<double>(3, 60, 0.0, 0.0), 2, 5);
    CHECK(t.final_distribution()[2] == 1.0);
  }
  SUBCASE("two-state closed form") {
    const double mu = 1.7, lambda = 0.6;
    const auto t = matrix_exponential_oracle(hourly({mu}, {lambda}), 0, 1);
    const double p1 = lambda / (mu + lambda) * (1.0 - std::exp(-(mu + lambda)));
    CHECK(std::abs(t.final_distribution()[1] - p1) < 1e-10);
  }
  SUBCASE("rows are distributions") {
    std::mt19937_64 rng(3);
    const auto t = matrix_exponential_oracle(random_rates(rng, 24, 30.0), 4, 12, 4);
    CHECK(t.max_drift <= 1e-12);
  }
}

TEST_CASE("monte_carlo_oracle examples") {
  SUBCASE("zero rates give the indicator") {
    const auto e = monte_carlo_oracle(constant_rates<double>(4, 60, 0.0, 0.0), 2, 5, 1000, 1);
    for (Eigen::Index k = 0; k < e.probs.rows(); ++k) CHECK(e.probs(k, 2) == 1.0);
  }
  SUBCASE("pure birth within three standard errors") {
    const auto e = monte_carlo_oracle(hourly({0.0}, {1.0}), 0, 1, 100000, 11);
    const Eigen::Index last = e.probs.rows() - 1;
    CHECK(std::abs(e.probs(last, 1) - 0.63212) <= 3.0 * e.std_errors(last, 1));
  }
  SUBCASE("fixed seed is reproducible") {
    const auto rates = hourly({2.0, 5.0}, {4.0, 1.0});
    const auto a = monte_carlo_oracle(rates, 2, 6, 5000, 42);
    const auto b = monte_carlo_oracle(rates, 2, 6, 5000, 42);
    CHECK(a.probs == b.probs);
  }
}

TEST_CASE("property: conservation and non-negativity") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> cap(1, 20);
  for (int rep = 0; rep < 20; ++rep) {
    const int c = cap(rng);
    const int s = std::uniform_int_distribution<int>(0, c)(rng);
    const auto t = transient_probabilities(random_rates(rng, 24, 30.0), s, c);
    CHECK(t.renormalizations == 0);
    CHECK(t.max_drift <= 1e-8);
    CHECK(t.min_value >= -1e-12);
    CHECK((t.probs.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("property: RK4 agrees with the exponential oracle") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const int c = std::uniform_int_distribution<int>(1, 20)(rng);
    const int s = std::uniform_int_distribution<int>(0, c)(rng);
    const auto rates = random_rates(rng, 24, 30.0);
    const auto rk = transient_probabilities(rates, s, c);
    const auto ex = matrix_exponential_oracle(rates, s, c);
    for (std::size_t i = 0; i < rk.interval_begin.size(); ++i) {
      const Eigen::Index row = rk.interval_begin[i];
      const Eigen::Index erow = ex.interval_begin[i];
      CHECK((rk.probs.row(row) - ex.probs.row(erow)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("property: RK4 agrees with Monte Carlo") {
  const auto rates = hourly({3.0, 1.0, 6.0}, {1.0, 4.0, 2.0});
  const auto rk = transient_probabilities(rates, 2, 5);
  const auto mc = monte_carlo_oracle(rates, 2, 5, 50000, 9);
  for (std::size_t i = 0; i < rk.interval_begin.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    for (int sigma = 0; sigma <= 5; ++sigma) {
      const double se = std::max(mc.std_errors(k, sigma), 1e-3);
      CHECK(std::abs(rk.probs(rk.interval_begin[i], sigma) - mc.probs(k, sigma)) <= 4.0 * se);
    }
  }
}

TEST_CASE("property: mirror symmetry") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const int c = std::uniform_int_distribution<int>(1, 15)(rng);
    const int s = std::uniform_int_distribution<int>(0, c)(rng);
    const auto rates = random_rates(rng, 12, 20.0);
    RateSeries swapped = rates;
    std::swap(swapped.pickups, swapped.returns);
    const auto a = transient_probabilities(rates, s, c);
    const auto b = transient_probabilities(swapped, c - s, c);
    REQUIRE(a.probs.rows() == b.probs.rows());
    CHECK((a.probs - b.probs.rowwise().reverse()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("property: fourth-order convergence") {
  const auto rates = hourly({8.0, 2.0, 12.0}, {3.0, 9.0, 5.0});
  const auto exact = matrix_exponential_oracle(rates, 3, 8).final_distribution();
  std::vector<double> log_h, log_err;
  for (int m : {4, 8, 16}) {
    TransientOptions opt;
    opt.substeps_per_interval = m;
    opt.max_step_stiffness = 1e9;
    opt.renormalize_tolerance = 1.0;
    const auto t = transient_probabilities(rates, 3, 8, opt);
    log_h.push_back(std::log(1.0 / m));
    log_err.push_back(std::log((t.final_distribution() - exact).cwiseAbs().maxCoeff()));
  }
  const double slope = (log_err.back() - log_err.front()) / (log_h.back() - log_h.front());
  CHECK(slope >= 3.5);
}

TEST_CASE("sample_events respects zero-rate intervals") {
  std::mt19937_64 rng(1);
  const auto events = sample_events(hourly({0.0, 5.0}, {0.0, 0.0}), rng);
  for (const auto& e : events) {
    CHECK(e.time_hours >= 1.0);
    CHECK(e.kind == EventKind::Pickup);
  }
}
