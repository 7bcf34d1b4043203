#include "bikeinv/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>

#include "bikeinv/csv.hpp"

namespace bikeinv {

std::string bias_kind_name(BiasKind kind) {
  switch (kind) {
    case BiasKind::SameSide: return "same_side";
    case BiasKind::Opposite1: return "opposite_1";
    case BiasKind::Opposite2: return "opposite_2";
  }
  return "unknown";
}

std::optional<BiasKind> parse_bias_kind(std::string_view name) {
  if (name == "same_side") return BiasKind::SameSide;
  if (name == "opposite_1") return BiasKind::Opposite1;
  if (name == "opposite_2") return BiasKind::Opposite2;
  return std::nullopt;
}

RateSeries apply_bias(const RateSeries& rates, const BiasSpec& spec) {
  if (!(spec.delta >= 0.0)) throw DomainError("bias level must be non-negative");
  RateSeries out = rates;
  const double d = spec.delta;
  switch (spec.kind) {
    case BiasKind::SameSide:
      out.pickups.array() += d;
      out.returns.array() += d;
      break;
    case BiasKind::Opposite1:
      out.pickups.array() += d;
      out.returns = (out.returns.array() - d).max(0.0);
      break;
    case BiasKind::Opposite2:
      out.pickups = (out.pickups.array() - d).max(0.0);
      out.returns.array() += d;
      break;
  }
  return out;
}

std::vector<double> default_delta_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.5 * i);
  return grid;
}

BiasStudy bias_study(const DemandSeries& day, const EventStream& events, int capacity,
                     const PenaltyConfig& penalties, const std::vector<double>& deltas,
                     const TransientOptions& options) {
  if (day.n_days() != 1) throw DomainError("bias study needs exactly one day");
  const RateSeries truth = counts_as_rates(day);
  BiasStudy study;
  study.oracle_s_star = udf_curve(truth, capacity, penalties, options).s_star;
  study.oracle_cost = replay_cost(events, study.oracle_s_star, capacity, penalties).cost;
  for (auto kind : {BiasKind::SameSide, BiasKind::Opposite1, BiasKind::Opposite2}) {
    BiasCurve curve{kind, {}};
    for (double d : deltas) {
      const auto biased = apply_bias(truth, {kind, d});
      BiasPoint p;
      p.delta = d;
      p.s_star = udf_curve(biased, capacity, penalties, options).s_star;
      p.cost = replay_cost(events, p.s_star, capacity, penalties).cost;
      p.ce = cumulative_error(truth.pickups, truth.returns, biased.pickups, biased.returns);
      curve.points.push_back(p);
    }
    study.curves.push_back(std::move(curve));
  }
  return study;
}

void write_bias_csv(std::ostream& out, const BiasStudy& study) {
  out << "kind,delta,s_star,cost\n";
  for (const auto& c : study.curves)
    for (const auto& p : c.points)
      out << bias_kind_name(c.kind) << ',' << csv::format_double(p.delta) << ',' << p.s_star << ','
          << csv::format_double(p.cost) << '\n';
}

PeakedDay peaked_synthetic_day(std::uint64_t seed) {
  constexpr int kSlots = 24;
  // Commuter station: drains to near empty by 10:00, overfills after 17:00.
  constexpr std::array<int, kSlots> pickups{0, 0, 0, 0, 0, 1, 2, 6, 20, 8, 3, 2, 2, 2, 2, 2, 3, 5, 8, 4, 2, 1, 0, 0};
  constexpr std::array<int, kSlots> returns{0, 0, 0, 0, 0, 0, 1, 3, 8, 4, 2, 2, 2, 2, 2, 3, 6, 14, 20, 12, 6, 3, 1, 0};
  PeakedDay out;
  out.day.station = "synthetic-peaked";
  out.day.interval_minutes = 60;
  out.day.first_day = Date{std::chrono::year{2018} / std::chrono::November / 13};
  out.day.pickups = Eigen::Map<const Eigen::VectorXi>(pickups.data(), kSlots);
  out.day.returns = Eigen::Map<const Eigen::VectorXi>(returns.data(), kSlots);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> second(0, 3599);
  out.events.station = out.day.station;
  const Timestamp midnight{out.day.first_day};
  for (int h = 0; h < kSlots; ++h) {
    for (auto [kind, n] : {std::pair{EventKind::Pickup, out.day.pickups[h]}, std::pair{EventKind::Return, out.day.returns[h]}})
      for (int i = 0; i < n; ++i)
        out.events.events.push_back({midnight + std::chrono::seconds{3600 * h + second(rng)}, kind});
  }
  std::stable_sort(out.events.events.begin(), out.events.events.end(), event_before);
  return out;
}

}  // namespace bikeinv
