#include "bikeinv/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>

#include "bikeinv/csv.hpp"

namespace bikeinv {

namespace {

double bump(double hour, double centre, double width) {
  const double z = (hour - centre) / width;
  return std::exp(-0.5 * z * z);
}

struct Shape {
  double pickups, returns;
};

Shape weekday_shape(StationProfile p, double h) {
  const double am = bump(h, 8.0, 1.3), pm = bump(h, 17.5, 1.5), noon = bump(h, 13.0, 2.5);
  switch (p) {
    case StationProfile::Residential: return {0.4 + 9.0 * am + 2.0 * pm + 1.0 * noon, 0.4 + 1.5 * am + 9.0 * pm + 1.0 * noon};
    case StationProfile::Business: return {0.3 + 1.5 * am + 9.0 * pm + 1.5 * noon, 0.3 + 9.0 * am + 1.5 * pm + 1.5 * noon};
    case StationProfile::Leisure: return {0.3 + 2.0 * am + 3.0 * pm + 3.5 * noon, 0.3 + 2.0 * am + 3.0 * pm + 3.5 * noon};
  }
  return {0, 0};
}

Shape weekend_shape(StationProfile p, double h) {
  const double late = bump(h, 12.5, 2.5), eve = bump(h, 17.0, 2.0);
  switch (p) {
    case StationProfile::Residential: return {0.4 + 6.0 * late + 1.0 * eve, 0.4 + 1.5 * late + 5.5 * eve};
    case StationProfile::Business: return {0.2 + 1.0 * late + 1.5 * eve, 0.2 + 1.5 * late + 1.0 * eve};
    case StationProfile::Leisure: return {0.3 + 7.0 * late + 3.0 * eve, 0.3 + 4.0 * late + 6.0 * eve};
  }
  return {0, 0};
}

struct ModelledStation {
  StationId id;
  StationProfile profile;
  double scale;
  int capacity;
};

const std::vector<ModelledStation>& modelled_stations() {
  static const std::vector<ModelledStation> stations{
      {"3001", StationProfile::Residential, 1.0, 18},
      {"3002", StationProfile::Business, 1.0, 18},
      {"3003", StationProfile::Leisure, 0.9, 14},
  };
  return stations;
}

}  // namespace

std::vector<StationInfo> read_stations_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw FormatError("station file has no header row");
  const auto header = csv::split_record(line);
  const int c_id = csv::column_index(header, "station_id");
  const int c_cap = csv::column_index(header, "capacity");
  if (c_id < 0) throw FormatError("station file: missing column station_id");
  if (c_cap < 0) throw FormatError("station file: missing column capacity");
  const auto needed = static_cast<std::size_t>(std::max(c_id, c_cap)) + 1;
  std::vector<StationInfo> out;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split_record(line);
    const std::string where = "station file line " + std::to_string(line_no);
    if (fields.size() < needed) throw DataError(where + ": too few fields");
    StationInfo s;
    s.id = fields[static_cast<std::size_t>(c_id)];
    try {
      s.capacity = std::stoi(fields[static_cast<std::size_t>(c_cap)]);
    } catch (const std::exception&) {
      throw DataError(where + ": bad capacity");
    }
    if (s.id.empty() || s.capacity < 1) throw DataError(where + ": capacity must be positive");
    out.push_back(std::move(s));
  }
  return out;
}

void write_stations_csv(std::ostream& out, std::span<const StationInfo> stations) {
  out << "station_id,capacity\n";
  for (const auto& s : stations) out << s.id << ',' << s.capacity << '\n';
}

void write_trips_csv(std::ostream& out, std::span<const TripRecord> trips) {
  out << "tripduration,starttime,stoptime,start station id,end station id\n";
  for (const auto& t : trips)
    out << (t.end_time - t.start_time).count() << ',' << format_timestamp(t.start_time) << ','
        << format_timestamp(t.end_time) << ',' << t.start_station << ',' << t.end_station << '\n';
}

HourlyRate synthetic_rate(StationProfile profile, double scale, int hour, int day_of_week,
                          double temperature_c, double rain_probability) {
  const double h = hour + 0.5;
  const Shape s = day_of_week < 5 ? weekday_shape(profile, h) : weekend_shape(profile, h);
  // Demand rises with warmth up to the low twenties and drops in rain. The
  // sensitivities differ between the two processes, so weather moves the
  // day's net demand and not only its volume.
  struct Sensitivity {
    double temp, rain;
  };
  Sensitivity p{0.07, -2.0}, r{0.07, -2.0};
  switch (profile) {
    case StationProfile::Residential: p = {0.06, -2.8}; r = {0.08, -0.8}; break;
    case StationProfile::Business: p = {0.08, -0.8}; r = {0.06, -2.8}; break;
    case StationProfile::Leisure: p = {0.04, -1.5}; r = {0.10, -1.5}; break;
  }
  const double warm = std::clamp(temperature_c, -10.0, 35.0);
  const double heat = 0.004 * std::pow(std::max(warm - 24.0, 0.0), 2.0);
  auto factor = [&](Sensitivity k) { return scale * std::exp(k.temp * (warm - 15.0) - heat + k.rain * rain_probability); };
  return {factor(p) * s.pickups, factor(r) * s.returns};
}

SyntheticCorpus generate_corpus(const SyntheticOptions& options, std::uint64_t seed) {
  using namespace std::chrono;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticCorpus corpus;
  const Date first{year{options.year} / January / 1};
  const Date last{year{options.year + 1} / January / 1};
  const int n_days = static_cast<int>((last - first).count());

  // Weather: seasonal temperature with a daily cycle and persistent
  // anomalies; rain arrives in multi-day spells.
  double anomaly = 0.0;
  bool rainy = false;
  for (int d = 0; d < n_days; ++d) {
    anomaly = 0.7 * anomaly + 2.5 * normal(rng);
    const double switch_p = rainy ? 0.45 : 0.2;
    if (unit(rng) < switch_p) rainy = !rainy;
    const double seasonal = 12.5 - 12.0 * std::cos(2.0 * std::numbers::pi * (d - 20.0) / 365.0);
    for (int h = 0; h < 24; ++h) {
      WeatherRecord w;
      w.time = Timestamp{first + days{d}} + hours{h};
      w.temperature_c = seasonal + anomaly + 4.0 * std::sin(2.0 * std::numbers::pi * (h - 9.0) / 24.0) + 0.5 * normal(rng);
      const double base = rainy ? 0.55 + 0.35 * unit(rng) : 0.15 * unit(rng);
      w.rain_probability = std::clamp(base, 0.0, 1.0);
      corpus.weather.push_back(w);
    }
  }

  std::vector<StationId> background;
  for (int b = 0; b < options.n_background; ++b) {
    char id[16];
    std::snprintf(id, sizeof id, "%d", 5001 + b);
    background.emplace_back(id);
  }
  std::uniform_int_distribution<std::size_t> pick_bg(0, background.size() - 1);
  std::uniform_int_distribution<int> within(0, 3599);
  std::uniform_int_distribution<int> duration(300, 2400);

  for (const auto& st : modelled_stations()) {
    corpus.stations.push_back({st.id, st.capacity});
    for (int d = 0; d < n_days; ++d) {
      const int dow = day_of_week(first + days{d});
      for (int h = 0; h < 24; ++h) {
        const auto& w = corpus.weather[static_cast<std::size_t>(24 * d + h)];
        const auto rate = synthetic_rate(st.profile, st.scale, h, dow, w.temperature_c, w.rain_probability);
        const Timestamp hour_start = w.time;
        const int n_pick = std::poisson_distribution<int>(rate.pickups)(rng);
        for (int i = 0; i < n_pick; ++i) {
          const Timestamp start = hour_start + seconds{within(rng)};
          corpus.trips.push_back({start, start + seconds{duration(rng)}, st.id, background[pick_bg(rng)]});
        }
        const int n_ret = std::poisson_distribution<int>(rate.returns)(rng);
        for (int i = 0; i < n_ret; ++i) {
          const Timestamp end = hour_start + seconds{within(rng)};
          corpus.trips.push_back({end - seconds{duration(rng)}, end, background[pick_bg(rng)], st.id});
        }
      }
    }
  }
  for (const auto& id : background) corpus.stations.push_back({id, 25});
  std::stable_sort(corpus.trips.begin(), corpus.trips.end(), [](const TripRecord& a, const TripRecord& b) {
    if (a.start_time != b.start_time) return a.start_time < b.start_time;
    if (a.start_station != b.start_station) return a.start_station < b.start_station;
    return a.end_time < b.end_time;
  });
  return corpus;
}

double sinusoid_rate(double hour) { return 10.0 + 5.0 * std::sin(2.0 * std::numbers::pi * hour / 24.0); }

DemandSeries sinusoidal_series(Date first, int n_days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DemandSeries s;
  s.station = "sinusoid";
  s.interval_minutes = 60;
  s.first_day = first;
  const Eigen::Index n = static_cast<Eigen::Index>(n_days) * 24;
  s.pickups.resize(n);
  s.returns.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    std::poisson_distribution<int> pois(sinusoid_rate(static_cast<double>(t % 24)));
    s.pickups[t] = pois(rng);
    s.returns[t] = pois(rng);
  }
  std::vector<WeatherRecord> weather{{Timestamp{first}, 15.0, 0.0}};
  s.covariates = build_covariates(weather, {first, n_days}, 60);
  return s;
}

}  // namespace bikeinv
