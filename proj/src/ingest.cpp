#include "bikeinv/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "bikeinv/csv.hpp"

namespace bikeinv {

namespace {

using std::chrono::days;
using std::chrono::hours;
using std::chrono::minutes;

int require_column(const std::vector<std::string>& header, const std::string& name) {
  const int idx = csv::column_index(header, name);
  if (idx < 0) throw FormatError("missing required column '" + name + "'");
  return idx;
}

bool passes(const StationFilter& filter, const StationId& id) {
  return !filter || filter->count(id) > 0;
}

double parse_number(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
  }
}

}  // namespace

TripParseResult parse_trips(std::istream& in, const StationFilter& filter,
                            const TripColumns& columns) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw FormatError("trip file has no header row");
  const auto header = csv::split_record(line);
  const int c_start = require_column(header, columns.start_time);
  const int c_end = require_column(header, columns.end_time);
  const int c_from = require_column(header, columns.start_station);
  const int c_to = require_column(header, columns.end_station);
  const auto needed = static_cast<std::size_t>(std::max({c_start, c_end, c_from, c_to})) + 1;

  TripParseResult result;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split_record(line);
    if (fields.size() < needed) {
      result.errors.push_back({line_no, "expected at least " + std::to_string(needed) + " fields"});
      continue;
    }
    TripRecord rec;
    rec.start_station = fields[c_from];
    rec.end_station = fields[c_to];
    if (rec.start_station.empty() || rec.end_station.empty()) {
      result.errors.push_back({line_no, "empty station id"});
      continue;
    }
    if (!passes(filter, rec.start_station) && !passes(filter, rec.end_station)) continue;
    auto start = parse_timestamp(fields[c_start]);
    auto end = parse_timestamp(fields[c_end]);
    if (!start || !end) {
      result.errors.push_back(
          {line_no, "unparseable timestamp '" + (start ? fields[c_end] : fields[c_start]) + "'"});
      continue;
    }
    if (*end < *start) {
      result.errors.push_back({line_no, "end time before start time"});
      continue;
    }
    rec.start_time = *start;
    rec.end_time = *end;
    result.trips.push_back(std::move(rec));
  }
  return result;
}

EventStream EventStream::day(Date d) const {
  EventStream out{station, {}};
  const Timestamp lo{d};
  const Timestamp hi{d + days{1}};
  auto first = std::lower_bound(events.begin(), events.end(), lo,
                                [](const Event& e, Timestamp t) { return e.time < t; });
  auto last = std::lower_bound(first, events.end(), hi,
                               [](const Event& e, Timestamp t) { return e.time < t; });
  out.events.assign(first, last);
  return out;
}

std::map<StationId, EventStream> to_event_streams(std::span<const TripRecord> trips) {
  std::map<StationId, EventStream> streams;
  for (const auto& trip : trips) {
    auto& from = streams[trip.start_station];
    from.station = trip.start_station;
    from.events.push_back({trip.start_time, EventKind::Pickup});
    auto& to = streams[trip.end_station];
    to.station = trip.end_station;
    to.events.push_back({trip.end_time, EventKind::Return});
  }
  for (auto& [id, stream] : streams)
    std::stable_sort(stream.events.begin(), stream.events.end(), event_before);
  return streams;
}

std::vector<StationId> top_stations(std::span<const TripRecord> trips, std::size_t n) {
  std::unordered_map<StationId, std::size_t> counts;
  for (const auto& trip : trips) ++counts[trip.start_station];
  std::vector<std::pair<StationId, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<StationId> out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

void validate_interval(int interval_minutes) {
  if (interval_minutes != 15 && interval_minutes != 30 && interval_minutes != 60)
    throw ConfigError("interval must be 15, 30 or 60 minutes, got " +
                      std::to_string(interval_minutes));
}

std::vector<std::string> CovariateLayout::column_names() const {
  std::vector<std::string> names{"temperature_c", "rain_probability"};
  for (int d = 0; d < 7; ++d) names.push_back("dow_" + std::to_string(d));
  for (int s = 0; s < slots(); ++s) names.push_back("tod_" + std::to_string(s));
  return names;
}

std::vector<WeatherRecord> parse_weather(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw FormatError("weather file has no header row");
  const auto header = csv::split_record(line);
  const int c_time = require_column(header, "timestamp");
  const int c_temp = require_column(header, "temperature_c");
  const int c_rain = require_column(header, "rain_probability");
  const auto needed = static_cast<std::size_t>(std::max({c_time, c_temp, c_rain})) + 1;

  std::vector<WeatherRecord> out;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split_record(line);
    if (fields.size() < needed)
      throw DataError("line " + std::to_string(line_no) + ": too few fields in weather row");
    auto t = parse_timestamp(fields[c_time]);
    if (!t) throw DataError("line " + std::to_string(line_no) + ": unparseable timestamp");
    WeatherRecord rec{*t, parse_number(fields[c_temp], line_no, "temperature"),
                      parse_number(fields[c_rain], line_no, "rain probability")};
    if (rec.rain_probability < 0.0 || rec.rain_probability > 1.0)
      throw DataError("line " + std::to_string(line_no) + ": rain_probability outside [0,1]");
    out.push_back(rec);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const WeatherRecord& a, const WeatherRecord& b) { return a.time < b.time; });
  return out;
}

void write_weather_csv(std::ostream& out, std::span<const WeatherRecord> records) {
  out << "timestamp,temperature_c,rain_probability\n";
  for (const auto& r : records)
    out << format_timestamp(r.time) << ',' << csv::format_double(r.temperature_c) << ','
        << csv::format_double(r.rain_probability) << '\n';
}

CovariateMatrix build_covariates(std::span<const WeatherRecord> weather, DayRange range,
                                 int interval_minutes) {
  validate_interval(interval_minutes);
  std::vector<WeatherRecord> sorted(weather.begin(), weather.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const WeatherRecord& a, const WeatherRecord& b) { return a.time < b.time; });

  const CovariateLayout layout{interval_minutes};
  const int slots = layout.slots();
  CovariateMatrix cov{interval_minutes, Eigen::MatrixXd::Zero(
                                            static_cast<Eigen::Index>(range.n_days) * slots,
                                            layout.width())};
  std::size_t next = 0;
  const WeatherRecord* current = nullptr;
  for (int d = 0; d < range.n_days; ++d) {
    const Date day = range.first + days{d};
    const int dow = day_of_week(day);
    for (int s = 0; s < slots; ++s) {
      const Eigen::Index row = static_cast<Eigen::Index>(d) * slots + s;
      const Timestamp start = Timestamp{day} + minutes{s * interval_minutes};
      const Timestamp hour_end = std::chrono::floor<hours>(start) + hours{1};
      // Latest record stamped before the end of this interval's hour.
      while (next < sorted.size() && sorted[next].time < hour_end) current = &sorted[next++];
      if (!current)
        throw DataError("no weather record at or before " + format_timestamp(start) +
                        " to fill from");
      cov.values(row, CovariateLayout::temperature) = current->temperature_c;
      cov.values(row, CovariateLayout::rain_probability) = current->rain_probability;
      cov.values(row, CovariateLayout::day_of_week_offset + dow) = 1.0;
      cov.values(row, CovariateLayout::time_of_day_offset + s) = 1.0;
    }
  }
  return cov;
}

Timestamp DemandSeries::interval_start(Eigen::Index t) const {
  return Timestamp{first_day} + minutes{static_cast<long long>(t) * interval_minutes};
}

DemandSeries DemandSeries::days(int offset, int count) const {
  if (offset < 0 || count < 0 || offset + count > n_days())
    throw DomainError("day slice outside series");
  const Eigen::Index start = static_cast<Eigen::Index>(offset) * slots();
  const Eigen::Index len = static_cast<Eigen::Index>(count) * slots();
  DemandSeries out;
  out.station = station;
  out.interval_minutes = interval_minutes;
  out.first_day = first_day + std::chrono::days{offset};
  out.pickups = pickups.segment(start, len);
  out.returns = returns.segment(start, len);
  out.covariates.interval_minutes = interval_minutes;
  if (covariates.rows() > 0) out.covariates.values = covariates.values.middleRows(start, len);
  return out;
}

DemandSeries DemandSeries::day(Date d) const {
  return days(static_cast<int>((d - first_day).count()), 1);
}

void DemandSeries::validate() const {
  validate_interval(interval_minutes);
  if (pickups.size() != returns.size()) throw DataError(station + ": pickups/returns length mismatch");
  if (pickups.size() % slots() != 0) throw DataError(station + ": series does not tile whole days");
  if ((pickups.array() < 0).any() || (returns.array() < 0).any())
    throw DataError(station + ": negative count");
  if (covariates.rows() == 0) return;
  const auto layout = covariates.layout();
  if (covariates.interval_minutes != interval_minutes || covariates.rows() != pickups.size() ||
      covariates.values.cols() != layout.width())
    throw DataError(station + ": covariate matrix shape mismatch");
  const auto& v = covariates.values;
  const auto rain = v.col(CovariateLayout::rain_probability).array();
  if ((rain < 0.0).any() || (rain > 1.0).any()) throw DataError(station + ": rain outside [0,1]");
  const Eigen::VectorXd dow = v.middleCols(CovariateLayout::day_of_week_offset, 7).rowwise().sum();
  const Eigen::VectorXd tod =
      v.middleCols(CovariateLayout::time_of_day_offset, layout.slots()).rowwise().sum();
  if (((dow.array() - 1.0).abs() > 0.0).any() || ((tod.array() - 1.0).abs() > 0.0).any())
    throw DataError(station + ": one-hot block does not sum to 1");
}

DemandSeries aggregate(const EventStream& events, int interval_minutes, DayRange range) {
  validate_interval(interval_minutes);
  DemandSeries out;
  out.station = events.station;
  out.interval_minutes = interval_minutes;
  out.first_day = range.first;
  const Eigen::Index n = static_cast<Eigen::Index>(range.n_days) * slots_per_day(interval_minutes);
  out.pickups = Eigen::VectorXi::Zero(n);
  out.returns = Eigen::VectorXi::Zero(n);
  out.covariates.interval_minutes = interval_minutes;
  const Timestamp lo{range.first};
  const Timestamp hi{range.end()};
  const long long width = interval_minutes * 60LL;
  for (const auto& e : events.events) {
    if (e.time < lo || e.time >= hi) continue;
    const auto idx = static_cast<Eigen::Index>((e.time - lo).count() / width);
    (e.kind == EventKind::Pickup ? out.pickups : out.returns)[idx] += 1;
  }
  return out;
}

DataSplit split(const DemandSeries& series) {
  const std::chrono::year_month_day ymd{series.first_day};
  if (ymd.day() != std::chrono::day{1})
    throw ConfigError("series must start on the first day of a month");
  const Date end = add_months(series.first_day, 12);
  if (series.range().end() != end)
    throw ConfigError("series must span exactly 12 calendar months, got " +
                      std::to_string(series.n_days()) + " days");
  const int n_train = static_cast<int>((add_months(series.first_day, 9) - series.first_day).count());
  const int n_val =
      static_cast<int>((add_months(series.first_day, 10) - series.first_day).count()) - n_train;
  const int n_test = series.n_days() - n_train - n_val;
  return {series.days(0, n_train), series.days(n_train, n_val),
          series.days(n_train + n_val, n_test)};
}

void write_demand_csv(std::ostream& out, const DemandSeries& series) {
  const bool with_cov = series.covariates.rows() > 0;
  out << "interval_start,pickups,returns";
  if (with_cov)
    for (const auto& name : series.covariates.layout().column_names()) out << ',' << name;
  out << '\n';
  for (Eigen::Index t = 0; t < series.size(); ++t) {
    out << format_timestamp(series.interval_start(t)) << ',' << series.pickups[t] << ','
        << series.returns[t];
    if (with_cov)
      for (Eigen::Index c = 0; c < series.covariates.values.cols(); ++c)
        out << ',' << csv::format_double(series.covariates.values(t, c));
    out << '\n';
  }
}

DemandSeries read_demand_csv(std::istream& in, const StationId& station) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw FormatError("demand file has no header row");
  const auto header = csv::split_record(line);
  if (header.size() < 3 || header[0] != "interval_start" || header[1] != "pickups" ||
      header[2] != "returns")
    throw FormatError("demand file header must start with interval_start,pickups,returns");
  const int n_cov = static_cast<int>(header.size()) - 3;
  int n_tod = 0;
  for (const auto& h : header)
    if (h.rfind("tod_", 0) == 0) ++n_tod;

  std::vector<Timestamp> times;
  std::vector<int> p, r;
  std::vector<double> cov;
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split_record(line);
    if (fields.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": wrong field count");
    auto t = parse_timestamp(fields[0]);
    if (!t) throw DataError("line " + std::to_string(line_no) + ": unparseable timestamp");
    times.push_back(*t);
    p.push_back(static_cast<int>(parse_number(fields[1], line_no, "pickup count")));
    r.push_back(static_cast<int>(parse_number(fields[2], line_no, "return count")));
    for (int c = 0; c < n_cov; ++c) cov.push_back(parse_number(fields[3 + c], line_no, "covariate"));
  }
  if (times.empty()) throw DataError("demand file has no rows");

  DemandSeries s;
  s.station = station;
  if (n_tod > 0) {
    if (1440 % n_tod != 0) throw FormatError("time-of-day block width does not tile a day");
    s.interval_minutes = 1440 / n_tod;
  } else if (times.size() >= 2) {
    s.interval_minutes = static_cast<int>((times[1] - times[0]).count() / 60);
  }
  validate_interval(s.interval_minutes);
  s.first_day = date_of(times.front());
  const auto n = static_cast<Eigen::Index>(times.size());
  s.pickups = Eigen::Map<Eigen::VectorXi>(p.data(), n);
  s.returns = Eigen::Map<Eigen::VectorXi>(r.data(), n);
  s.covariates.interval_minutes = s.interval_minutes;
  if (n_cov > 0)
    s.covariates.values =
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            cov.data(), n, n_cov);
  for (Eigen::Index t = 0; t < n; ++t)
    if (times[t] != s.interval_start(t))
      throw DataError("demand rows are not contiguous at row " + std::to_string(t + 1));
  s.validate();
  return s;
}

void write_events_csv(std::ostream& out, const EventStream& events) {
  out << "time,kind\n";
  for (const auto& e : events.events)
    out << format_timestamp(e.time) << ',' << (e.kind == EventKind::Pickup ? "pickup" : "return")
        << '\n';
}

EventStream read_events_csv(std::istream& in, const StationId& station) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_record(in, line, line_no)) throw FormatError("event file has no header row");
  EventStream out{station, {}};
  while (csv::next_record(in, line, line_no)) {
    const auto fields = csv::split_record(line);
    auto t = fields.size() == 2 ? parse_timestamp(fields[0]) : std::nullopt;
    if (!t || (fields[1] != "pickup" && fields[1] != "return"))
      throw DataError("line " + std::to_string(line_no) + ": bad event row");
    out.events.push_back({*t, fields[1] == "pickup" ? EventKind::Pickup : EventKind::Return});
  }
  std::stable_sort(out.events.begin(), out.events.end(), event_before);
  return out;
}

}  // namespace bikeinv
