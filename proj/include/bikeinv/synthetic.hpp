#ifndef BIKEINV_SYNTHETIC_HPP
#define BIKEINV_SYNTHETIC_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bikeinv/ingest.hpp"

namespace bikeinv {

struct StationInfo {
  StationId id;
  int capacity = 0;
};

/// Columns station_id, capacity.
std::vector<StationInfo> read_stations_csv(std::istream& in);
void write_stations_csv(std::ostream& out, std::span<const StationInfo> stations);

/// Citi Bike style: tripduration, starttime, stoptime, start station id, end station id.
void write_trips_csv(std::ostream& out, std::span<const TripRecord> trips);

enum class StationProfile { Residential, Business, Leisure };

/// Expected events per hour at a station. Weekdays carry commute peaks,
/// weekends a midday bump; warm, dry hours scale demand up.
struct HourlyRate {
  double pickups = 0.0;
  double returns = 0.0;
};
HourlyRate synthetic_rate(StationProfile profile, double scale, int hour, int day_of_week,
                          double temperature_c, double rain_probability);

struct SyntheticOptions {
  int year = 2018;
  int n_background = 12;  // counterpart stations for the trips
};

struct SyntheticCorpus {
  std::vector<TripRecord> trips;  // sorted by start time
  std::vector<WeatherRecord> weather;
  std::vector<StationInfo> stations;  // the modelled stations first
};

/// One calendar year of hourly weather and trips for three modelled
/// stations (residential, business, leisure) plus background stations.
SyntheticCorpus generate_corpus(const SyntheticOptions& options, std::uint64_t seed);

/// 10 + 5 sin(2 pi h / 24) events per hour.
double sinusoid_rate(double hour);

/// Hourly series whose pickups and returns are independent Poisson draws at
/// sinusoid_rate, with calendar covariates and constant weather.
DemandSeries sinusoidal_series(Date first, int n_days, std::uint64_t seed);

}  // namespace bikeinv

#endif  // BIKEINV_SYNTHETIC_HPP
