#ifndef BIKEINV_INGEST_HPP
#define BIKEINV_INGEST_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bikeinv/common.hpp"

namespace bikeinv {

struct TripRecord {
  Timestamp start_time;
  Timestamp end_time;
  StationId start_station;
  StationId end_station;
};

/// Column names in the trip file. Defaults follow the public Citi Bike schema.
struct TripColumns {
  std::string start_time = "starttime";
  std::string end_time = "stoptime";
  std::string start_station = "start station id";
  std::string end_station = "end station id";
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct TripParseResult {
  std::vector<TripRecord> trips;
  std::vector<RowError> errors;
};

/// nullopt keeps every station.
using StationFilter = std::optional<std::set<StationId>>;

/// Keeps rows whose start or end station passes the filter. Rows with bad
/// timestamps, empty station ids or end < start are collected in `errors`
/// with their 1-based line number. Throws FormatError when a required column
/// is missing from the header.
TripParseResult parse_trips(std::istream& in, const StationFilter& filter,
                            const TripColumns& columns = {});

enum class EventKind : std::uint8_t { Pickup = 0, Return = 1 };

struct Event {
  Timestamp time;
  EventKind kind;
};

/// Orders by time; at equal times pickups come first.
inline bool event_before(const Event& a, const Event& b) {
  return a.time != b.time ? a.time < b.time : a.kind < b.kind;
}

struct EventStream {
  StationId station;
  std::vector<Event> events;

  /// Events with time in [day, day + 1).
  EventStream day(Date d) const;
};

std::map<StationId, EventStream> to_event_streams(std::span<const TripRecord> trips);

/// Stations ranked by pickup count, ties broken by id. Returns at most n.
std::vector<StationId> top_stations(std::span<const TripRecord> trips, std::size_t n);

struct DayRange {
  Date first;
  int n_days = 0;

  Date end() const { return first + std::chrono::days{n_days}; }
  bool contains(Date d) const { return d >= first && d < end(); }
};

/// Throws ConfigError unless interval is 15, 30 or 60.
void validate_interval(int interval_minutes);

inline int slots_per_day(int interval_minutes) { return 1440 / interval_minutes; }

/// Column layout of a covariate row:
/// [temperature, rain_probability, day_of_week one-hot (7), time_of_day one-hot].
struct CovariateLayout {
  static constexpr int temperature = 0;
  static constexpr int rain_probability = 1;
  static constexpr int day_of_week_offset = 2;
  static constexpr int time_of_day_offset = 9;

  int interval_minutes = 60;

  int slots() const { return slots_per_day(interval_minutes); }
  int width() const { return time_of_day_offset + slots(); }
  std::vector<std::string> column_names() const;
};

struct CovariateMatrix {
  int interval_minutes = 60;
  Eigen::MatrixXd values;  // one row per interval

  CovariateLayout layout() const { return {interval_minutes}; }
  Eigen::Index rows() const { return values.rows(); }
};

struct WeatherRecord {
  Timestamp time;
  double temperature_c = 0.0;
  double rain_probability = 0.0;
};

/// Columns: timestamp, temperature_c, rain_probability. Throws DataError on a
/// bad row and FormatError on a missing column.
std::vector<WeatherRecord> parse_weather(std::istream& in);
void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records);

/// Hourly measurements are held constant within the hour and gaps are
/// forward-filled from the latest earlier record. Throws DataError when the
/// first hour has nothing to fill from.
CovariateMatrix build_covariates(std::span<const WeatherRecord> weather, DayRange days,
                                 int interval_minutes);

struct DemandSeries {
  StationId station;
  int interval_minutes = 60;
  Date first_day;
  Eigen::VectorXi pickups;
  Eigen::VectorXi returns;
  CovariateMatrix covariates;  // empty until attached

  int slots() const { return slots_per_day(interval_minutes); }
  Eigen::Index size() const { return pickups.size(); }
  int n_days() const { return static_cast<int>(pickups.size() / slots()); }
  DayRange range() const { return {first_day, n_days()}; }
  Timestamp interval_start(Eigen::Index t) const;

  /// Whole-day slice [first + offset, first + offset + count).
  DemandSeries days(int offset, int count) const;
  DemandSeries day(Date d) const;

  /// Checks the length and one-hot invariants; throws DataError.
  void validate() const;
};

/// Counts events in left-closed, right-open intervals. Covariates are left
/// empty.
DemandSeries aggregate(const EventStream& events, int interval_minutes, DayRange days);

struct DataSplit {
  DemandSeries train;
  DemandSeries validation;
  DemandSeries test;
};

/// 9 / 1 / 2 calendar months. The series must start on the first of a month
/// and span exactly twelve months; otherwise ConfigError.
DataSplit split(const DemandSeries& series);

/// Columns interval_start, pickups, returns, then covariate columns.
void write_demand_csv(std::ostream& out, const DemandSeries& series);
DemandSeries read_demand_csv(std::istream& in, const StationId& station);

/// Columns time, kind (pickup|return).
void write_events_csv(std::ostream& out, const EventStream& events);
EventStream read_events_csv(std::istream& in, const StationId& station);

}  // namespace bikeinv

#endif  // BIKEINV_INGEST_HPP
