#ifndef BIKEINV_EXPERIMENTS_HPP
#define BIKEINV_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bikeinv/eval.hpp"
#include "bikeinv/ingest.hpp"
#include "bikeinv/inventory.hpp"

namespace bikeinv {

/// same_side: mu + d, lambda + d
/// opposite_1: mu + d, max(lambda - d, 0)
/// opposite_2: max(mu - d, 0), lambda + d
enum class BiasKind { SameSide, Opposite1, Opposite2 };

std::string bias_kind_name(BiasKind kind);
std::optional<BiasKind> parse_bias_kind(std::string_view name);

struct BiasSpec {
  BiasKind kind = BiasKind::SameSide;
  double delta = 0.0;  // events per interval
};

/// Throws DomainError for a negative delta.
RateSeries apply_bias(const RateSeries& rates, const BiasSpec& spec);

struct BiasPoint {
  double delta = 0.0;
  int s_star = 0;
  double cost = 0.0;  // replay against the true events
  double ce = 0.0;
};

struct BiasCurve {
  BiasKind kind = BiasKind::SameSide;
  std::vector<BiasPoint> points;
};

struct BiasStudy {
  int oracle_s_star = 0;
  double oracle_cost = 0.0;
  std::vector<BiasCurve> curves;  // same_side, opposite_1, opposite_2
};

/// 0, 0.5, ..., 25.
std::vector<double> default_delta_grid();

/// Biases the day's realized counts-as-rates, re-optimizes and replays.
BiasStudy bias_study(const DemandSeries& day, const EventStream& events, int capacity,
                     const PenaltyConfig& penalties, const std::vector<double>& deltas,
                     const TransientOptions& options = {});

/// Columns kind, delta, s_star, cost.
void write_bias_csv(std::ostream& out, const BiasStudy& study);

/// Hourly reference day with a morning pickup peak and an evening return
/// peak (20 per hour each) at a 40-dock station. Event times are drawn
/// uniformly inside each hour.
struct PeakedDay {
  DemandSeries day;
  EventStream events;
  int capacity = 40;
};

PeakedDay peaked_synthetic_day(std::uint64_t seed = 168);

}  // namespace bikeinv

#endif  // BIKEINV_EXPERIMENTS_HPP
