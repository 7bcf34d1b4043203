#include <doctest.h>

#include <sstream>

#include "bikeinv/eval.hpp"
#include "bikeinv/experiments.hpp"

using namespace bikeinv;

namespace {

RateSeries rates(std::initializer_list<double> mu, std::initializer_list<double> lambda) {
  RateSeries r;
  r.pickups = Eigen::Map<const Eigen::VectorXd>(mu.begin(), static_cast<Eigen::Index>(mu.size()));
  r.returns = Eigen::Map<const Eigen::VectorXd>(lambda.begin(), static_cast<Eigen::Index>(lambda.size()));
  return r;
}

const BiasCurve& curve(const BiasStudy& s, BiasKind kind) {
  for (const auto& c : s.curves)
    if (c.kind == kind) return c;
  throw std::logic_error("missing curve");
}

}  // namespace

TEST_CASE("apply_bias") {
  const auto r = rates({2.0, 0.5}, {3.0, 1.0});
  SUBCASE("zero delta") {
    for (auto k : {BiasKind::SameSide, BiasKind::Opposite1, BiasKind::Opposite2}) {
      const auto b = apply_bias(r, {k, 0.0});
      CHECK(b.pickups == r.pickups);
      CHECK(b.returns == r.returns);
    }
  }
  SUBCASE("same side adds to both") {
    const auto b = apply_bias(r, {BiasKind::SameSide, 1.5});
    CHECK(b.pickups[0] == 3.5);
    CHECK(b.returns[0] == 4.5);
  }
  SUBCASE("opposite_1 truncates returns at zero") {
    const auto b = apply_bias(r, {BiasKind::Opposite1, 5.0});
    CHECK(b.returns[0] == 0.0);
    CHECK(b.pickups[0] == 7.0);
  }
  SUBCASE("opposite_2 truncates pickups at zero") {
    const auto b = apply_bias(r, {BiasKind::Opposite2, 1.0});
    CHECK(b.pickups[1] == 0.0);
    CHECK(b.returns[1] == 2.0);
  }
  SUBCASE("negative delta") {
    CHECK_THROWS_AS(apply_bias(r, {BiasKind::SameSide, -1.0}), DomainError);
  }
  SUBCASE("property: never negative, same side keeps CE at zero") {
    for (double delta : default_delta_grid()) {
      for (auto k : {BiasKind::SameSide, BiasKind::Opposite1, BiasKind::Opposite2}) {
        const auto b = apply_bias(r, {k, delta});
        CHECK(b.pickups.minCoeff() >= 0.0);
        CHECK(b.returns.minCoeff() >= 0.0);
      }
      const auto s = apply_bias(r, {BiasKind::SameSide, delta});
      CHECK(cumulative_error(r.pickups, r.returns, s.pickups, s.returns) == 0.0);
    }
  }
}

TEST_CASE("default grid") {
  const auto g = default_delta_grid();
  CHECK(g.size() == 51);
  CHECK(g.front() == 0.0);
  CHECK(g[1] == 0.5);
  CHECK(g.back() == 25.0);
  CHECK(parse_bias_kind("opposite_1") == BiasKind::Opposite1);
  CHECK_FALSE(parse_bias_kind("sideways").has_value());
}

TEST_CASE("bias study on the peaked day") {
  const auto day = peaked_synthetic_day();
  CHECK(day.capacity == 40);
  CHECK(day.day.pickups.maxCoeff() >= 15);
  CHECK(day.day.returns.maxCoeff() >= 15);
  const auto study = bias_study(day.day, day.events, day.capacity, {}, default_delta_grid());
  REQUIRE(study.curves.size() == 3);
  CHECK(study.oracle_s_star > 0);
  CHECK(study.oracle_s_star < day.capacity);

  SUBCASE("zero delta matches the oracle for every kind") {
    for (const auto& c : study.curves) {
      CHECK(c.points.front().delta == 0.0);
      CHECK(c.points.front().s_star == study.oracle_s_star);
      CHECK(c.points.front().cost == study.oracle_cost);
    }
  }
  SUBCASE("opposite biases push the decision to the bounds monotonically") {
    const auto& up = curve(study, BiasKind::Opposite1).points;
    const auto& down = curve(study, BiasKind::Opposite2).points;
    for (std::size_t i = 1; i < up.size(); ++i) {
      CHECK(up[i].s_star >= up[i - 1].s_star);
      CHECK(down[i].s_star <= down[i - 1].s_star);
    }
    CHECK(up.back().s_star == day.capacity);
    CHECK(down.back().s_star == 0);
  }
  SUBCASE("same side stays closer to the oracle") {
    const auto& same = curve(study, BiasKind::SameSide).points;
    const auto& up = curve(study, BiasKind::Opposite1).points;
    const auto& down = curve(study, BiasKind::Opposite2).points;
    for (std::size_t i = 0; i < same.size(); ++i) {
      const int d_same = std::abs(same[i].s_star - study.oracle_s_star);
      CHECK(d_same <= std::abs(up[i].s_star - study.oracle_s_star));
      CHECK(d_same <= std::abs(down[i].s_star - study.oracle_s_star));
      CHECK(same[i].ce == 0.0);
    }
  }
  SUBCASE("csv") {
    std::ostringstream out;
    write_bias_csv(out, study);
    CHECK(out.str().rfind("kind,delta,s_star,cost", 0) == 0);
  }
}

TEST_CASE("peaked day is reproducible") {
  const auto a = peaked_synthetic_day(5);
  const auto b = peaked_synthetic_day(5);
  REQUIRE(a.events.events.size() == b.events.events.size());
  for (std::size_t i = 0; i < a.events.events.size(); ++i) CHECK(a.events.events[i].time == b.events.events[i].time);
  CHECK(a.day.pickups == b.day.pickups);
}
