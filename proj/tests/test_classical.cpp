#include <doctest.h>

#include <random>

#include "bikeinv/classical.hpp"

using namespace bikeinv;
using namespace std::chrono;

namespace {

const Date kMonday{year{2018} / January / 1};

DemandSeries series(int n_days, int interval = 60) {
  auto s = aggregate({"A", {}}, interval, {kMonday, n_days});
  const std::vector<WeatherRecord> w{{Timestamp{kMonday} - hours{1}, 10.0, 0.0}};
  s.covariates = build_covariates(w, s.range(), interval);
  return s;
}

}  // namespace

TEST_CASE("fit_ha") {
  SUBCASE("constant series") {
    auto s = series(14);
    s.pickups.setConstant(5);
    const auto p = fit_ha(s);
    CHECK((p.pickups.array() == 5.0).all());
    CHECK((p.returns.array() == 0.0).all());
  }
  SUBCASE("two Mondays at 8am") {
    auto s = series(14);
    s.pickups[8] = 2;
    s.pickups[7 * 24 + 8] = 4;
    CHECK(fit_ha(s).pickups(0, 8) == 3.0);
  }
  SUBCASE("unobserved weekday cells are zero") {
    auto s = series(3);
    s.pickups.setConstant(4);
    const auto p = fit_ha(s);
    CHECK(p.pickups(2, 5) == 4.0);
    CHECK(p.pickups(5, 5) == 0.0);
  }
  SUBCASE("flat profile predicts a flat day") {
    auto s = series(7);
    s.pickups.setConstant(5);
    s.returns.setConstant(5);
    const auto r = predict(fit_ha(s), kMonday + days{30});
    CHECK((r.pickups.array() == 5.0).all());
    CHECK(r.size() == 24);
  }
}

TEST_CASE("fit_ma") {
  SUBCASE("constant history") {
    auto s = series(60);
    s.pickups.setConstant(5);
    const auto p = fit_ma(s, kMonday + days{60}, 30);
    CHECK((p.pickups.array() == 5.0).all());
  }
  SUBCASE("only the last thirty days count") {
    auto s = series(60);
    s.pickups.head(30 * 24).setConstant(2);
    s.pickups.tail(30 * 24).setConstant(8);
    const auto p = fit_ma(s, kMonday + days{60}, 30);
    CHECK((p.pickups.array() == 8.0).all());
  }
  SUBCASE("empty window") {
    auto s = series(10);
    CHECK_THROWS_AS(fit_ma(s, kMonday, 30), DataError);
  }
  SUBCASE("equals HA on exactly thirty days") {
    auto s = series(30);
    std::mt19937_64 rng(4);
    std::poisson_distribution<int> pois(3.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s.pickups[i] = pois(rng);
      s.returns[i] = pois(rng);
    }
    const auto ha = fit_ha(s);
    const auto ma = fit_ma(s, kMonday + days{30}, 30);
    CHECK(ha.pickups == ma.pickups);
    CHECK(ha.returns == ma.returns);
  }
}

TEST_CASE("property: HA is idempotent on its own predictions") {
  auto s = series(21);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> u(0, 9);
  Eigen::MatrixXi cells(7, 24);
  for (int d = 0; d < 7; ++d)
    for (int h = 0; h < 24; ++h) cells(d, h) = u(rng);
  for (int day = 0; day < 21; ++day)
    for (int h = 0; h < 24; ++h) s.pickups[day * 24 + h] = cells(day % 7, h);
  const auto first = fit_ha(s);
  auto again = s;
  for (int day = 0; day < 21; ++day) {
    const auto r = predict(first, kMonday + days{day});
    for (int h = 0; h < 24; ++h) again.pickups[day * 24 + h] = static_cast<int>(r.pickups[h]);
  }
  CHECK(fit_ha(again).pickups == first.pickups);
}

TEST_CASE("fit_lr") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> temp(0, 10);
  std::uniform_int_distribution<int> rain(0, 4);
  auto s = series(28);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s.covariates.values(i, CovariateLayout::temperature) = temp(rng);
    s.covariates.values(i, CovariateLayout::rain_probability) = rain(rng) / 4.0;
  }
  SUBCASE("exact linear counts") {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const int t = static_cast<int>(s.covariates.values(i, CovariateLayout::temperature));
      s.pickups[i] = 2 + 3 * t;
    }
    const auto m = fit_lr(s);
    CHECK(m.pickup_coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(m.pickup_coefficients[1 + CovariateLayout::temperature] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(std::abs(m.pickup_coefficients[1 + CovariateLayout::rain_probability]) < 1e-8);
    CHECK(m.pickup_coefficients.tail(m.pickup_coefficients.size() - 3).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("constant counts") {
    s.returns.setConstant(6);
    const auto m = fit_lr(s);
    CHECK(m.return_coefficients[0] == doctest::Approx(6.0).epsilon(1e-8));
    CHECK(m.return_coefficients.tail(m.return_coefficients.size() - 1).cwiseAbs().maxCoeff() < 1e-8);
  }
  SUBCASE("negative affine output is clamped") {
    LinearModel m;
    m.pickup_coefficients = Eigen::VectorXd::Zero(1 + 9 + 24);
    m.return_coefficients = m.pickup_coefficients;
    m.pickup_coefficients[0] = -1.2;
    const auto r = predict(m, s.days(0, 1).covariates);
    CHECK((r.pickups.array() == 0.0).all());
  }
  SUBCASE("residuals are orthogonal to the design") {
    std::poisson_distribution<int> pois(4.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) s.pickups[i] = pois(rng);
    const auto m = fit_lr(s);
    const Eigen::VectorXd raw =
        (s.covariates.values * m.pickup_coefficients.tail(s.covariates.values.cols())).array() +
        m.pickup_coefficients[0];
    const Eigen::VectorXd resid = s.pickups.cast<double>() - raw;
    CHECK(std::abs(resid.sum()) < 1e-8);
    for (int col : lr_design_columns(s.covariates.layout()))
      CHECK(std::abs(s.covariates.values.col(col).dot(resid)) < 1e-8);
  }
  SUBCASE("rank deficient design") {
    auto short_series = series(3);
    CHECK_THROWS_AS(fit_lr(short_series), FitError);
  }
}

TEST_CASE("property: predictions are non-negative") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 5.0);
  auto s = series(28);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s.covariates.values(i, 0) = n(rng);
    s.covariates.values(i, 1) = std::abs(n(rng)) / 20.0;
    s.pickups[i] = std::max(0, static_cast<int>(n(rng)));
    s.returns[i] = std::max(0, static_cast<int>(n(rng)));
  }
  const auto lr = fit_lr(s);
  const auto ha = fit_ha(s);
  for (int d = 0; d < 28; ++d) {
    const auto r = predict(lr, s.days(d, 1).covariates);
    CHECK(r.pickups.minCoeff() >= 0.0);
    CHECK(r.returns.minCoeff() >= 0.0);
    CHECK(predict(ha, kMonday + days{d}).pickups.minCoeff() >= 0.0);
  }
}

TEST_CASE("model JSON round trip") {
  auto s = series(14);
  s.pickups.setLinSpaced(s.size(), 0, 30);
  const auto ha = fit_ha(s);
  const auto back = seasonal_profile_from_json(to_json(ha));
  CHECK(back.pickups == ha.pickups);
  CHECK(back.interval_minutes == 60);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s.covariates.values(i, 0) = static_cast<double>(i % 17);
    s.covariates.values(i, 1) = static_cast<double>(i % 5) / 4.0;
  }
  const auto lr = fit_lr(s);
  CHECK(linear_model_from_json(to_json(lr)).pickup_coefficients == lr.pickup_coefficients);
}
