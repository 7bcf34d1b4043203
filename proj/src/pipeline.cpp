#include "bikeinv/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "bikeinv/checkpoint.hpp"
#include "bikeinv/classical.hpp"
#include "bikeinv/csv.hpp"
#include "bikeinv/eval.hpp"
#include "bikeinv/experiments.hpp"
#include "bikeinv/forecasters.hpp"
#include "bikeinv/ingest.hpp"
#include "bikeinv/synthetic.hpp"

namespace bikeinv {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& known_models() {
  static const std::vector<std::string> names{"HA", "MA", "LR", "P-RNN", "VP-RNN", "MOVP-RNN", "Oracle"};
  return names;
}

namespace {

std::string file_stem(const std::string& model) {
  std::string out;
  for (char c : model)
    if (c != '-') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

bool is_neural(const std::string& model) { return model == "P-RNN" || model == "VP-RNN" || model == "MOVP-RNN"; }

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key " + where + "." + key);
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& target, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + where + "." + key + " has the wrong type");
  }
}

// ---- artifact IO -----------------------------------------------------------

std::string provenance(const RunConfig& c) {
  return "# config_hash=" + c.hash() + " seed=" + std::to_string(c.seed) + "\n";
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path, const std::string& stage_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing " + path.string() + (stage_hint.empty() ? "" : " (run " + stage_hint + " first)"));
  return in;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string read_text(const fs::path& path, const std::string& stage_hint) {
  auto in = open_in(path, stage_hint);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON document with the provenance keys merged in front.
std::string stamped_json(const RunConfig& c, const std::string& body) {
  ordered_json out;
  out["config_hash"] = c.hash();
  out["seed"] = c.seed;
  const auto parsed = ordered_json::parse(body);
  for (const auto& [k, v] : parsed.items()) out[k] = v;
  return out.dump(2) + "\n";
}

fs::path demand_path(const RunConfig& c, const StationId& s) { return c.out / "demand" / (s + ".csv"); }
fs::path events_path(const RunConfig& c, const StationId& s) { return c.out / "events" / (s + ".csv"); }
fs::path model_dir(const RunConfig& c, const StationId& s) { return c.out / "models" / s; }
fs::path forecast_path(const RunConfig& c, const StationId& s, const std::string& m) {
  return c.out / "forecasts" / s / (file_stem(m) + ".csv");
}
fs::path loglik_path(const RunConfig& c, const StationId& s, const std::string& m) {
  return c.out / "forecasts" / s / (file_stem(m) + "_loglik.csv");
}
fs::path decision_path(const RunConfig& c, const StationId& s, const std::string& m) {
  return c.out / "decisions" / s / (file_stem(m) + ".csv");
}
fs::path selection_path(const RunConfig& c) { return c.out / "stations.csv"; }

std::vector<StationInfo> read_selection(const RunConfig& c) {
  auto in = open_in(selection_path(c), "ingest");
  return read_stations_csv(in);
}

DemandSeries load_demand(const RunConfig& c, const StationId& s) {
  auto in = open_in(demand_path(c, s), "ingest");
  auto series = read_demand_csv(in, s);
  if (series.interval_minutes != c.interval_minutes)
    throw ConfigError(demand_path(c, s).string() + " was built at " + std::to_string(series.interval_minutes) +
                      " minutes, config asks for " + std::to_string(c.interval_minutes));
  return series;
}

EventStream load_events(const RunConfig& c, const StationId& s) {
  auto in = open_in(events_path(c, s), "ingest");
  return read_events_csv(in, s);
}

// ---- models on disk --------------------------------------------------------

std::shared_ptr<const RecurrentRateModel> load_neural(const RunConfig& c, const StationId& s, const std::string& file) {
  const auto path = model_dir(c, s) / file;
  if (!fs::exists(path)) throw DataError("missing " + path.string() + " (run train first)");
  return std::make_shared<const RecurrentRateModel>(load_checkpoint_file(path.string()));
}

std::shared_ptr<const Forecaster> load_forecaster(const RunConfig& c, const StationId& s, const std::string& m) {
  PredictOptions popt;
  popt.n_samples = c.predict_samples;
  popt.seed = derive_seed(c.seed, "predict/" + s + "/" + m);
  const auto dir = model_dir(c, s);
  if (m == "HA") return std::make_shared<HistoricalAverage>(seasonal_profile_from_json(read_text(dir / "ha.json", "train")));
  if (m == "MA") return std::make_shared<MovingAverage>(c.ma_window_days);
  if (m == "LR") return std::make_shared<LinearRegression>(linear_model_from_json(read_text(dir / "lr.json", "train")));
  if (m == "Oracle") return std::make_shared<Oracle>();
  std::shared_ptr<RecurrentForecaster> f;
  if (m == "MOVP-RNN")
    f = std::make_shared<RecurrentForecaster>(m, load_neural(c, s, "movprnn.ckpt"), popt);
  else
    f = std::make_shared<RecurrentForecaster>(m, load_neural(c, s, file_stem(m) + "_pickups.ckpt"),
                                              load_neural(c, s, file_stem(m) + "_returns.ckpt"), popt);
  f->is_samples = c.is_samples;
  return f;
}

/// Rates and log-likelihoods read back from the forecast stage.
class StoredForecaster final : public Forecaster {
 public:
  StoredForecaster(std::string name, std::map<Date, RateSeries> rates, std::map<Date, double> ll)
      : name_(std::move(name)), rates_(std::move(rates)), ll_(std::move(ll)) {}
  std::string name() const override { return name_; }
  RateSeries forecast(const ForecastContext& ctx) const override {
    const auto it = rates_.find(ctx.date);
    if (it == rates_.end()) throw DataError(name_ + ": no stored forecast for " + format_date(ctx.date));
    return it->second;
  }
  std::optional<double> log_likelihood(const ForecastContext& ctx) const override {
    const auto it = ll_.find(ctx.date);
    if (it == ll_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::string name_;
  std::map<Date, RateSeries> rates_;
  std::map<Date, double> ll_;
};

double parse_field(const std::string& text, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(path.string() + " line " + std::to_string(line) + ": bad number '" + text + "'");
}

std::map<Date, RateSeries> read_forecasts(const RunConfig& c, const StationId& s, const std::string& m) {
  const auto path = forecast_path(c, s, m);
  auto in = open_in(path, "forecast");
  std::string line;
  std::size_t no = 0;
  if (!csv::next_record(in, line, no)) throw FormatError(path.string() + ": empty file");
  std::map<Date, std::vector<std::pair<double, double>>> rows;
  while (csv::next_record(in, line, no)) {
    const auto f = csv::split_record(line);
    if (f.size() != 4) throw FormatError(path.string() + " line " + std::to_string(no) + ": expected 4 fields");
    const auto d = parse_date(f[0]);
    if (!d) throw FormatError(path.string() + " line " + std::to_string(no) + ": bad date");
    rows[*d].emplace_back(parse_field(f[2], path, no), parse_field(f[3], path, no));
  }
  std::map<Date, RateSeries> out;
  for (const auto& [d, r] : rows) {
    RateSeries rs{c.interval_minutes, Eigen::VectorXd(static_cast<Eigen::Index>(r.size())),
                  Eigen::VectorXd(static_cast<Eigen::Index>(r.size()))};
    for (std::size_t k = 0; k < r.size(); ++k) {
      rs.pickups[static_cast<Eigen::Index>(k)] = r[k].first;
      rs.returns[static_cast<Eigen::Index>(k)] = r[k].second;
    }
    out.emplace(d, std::move(rs));
  }
  return out;
}

std::map<Date, double> read_loglik(const RunConfig& c, const StationId& s, const std::string& m) {
  std::map<Date, double> out;
  const auto path = loglik_path(c, s, m);
  if (!fs::exists(path)) return out;
  auto in = open_in(path, "forecast");
  std::string line;
  std::size_t no = 0;
  csv::next_record(in, line, no);
  while (csv::next_record(in, line, no)) {
    const auto f = csv::split_record(line);
    const auto d = f.size() == 2 ? parse_date(f[0]) : std::nullopt;
    if (!d) throw FormatError(path.string() + " line " + std::to_string(no) + ": expected date,log_likelihood");
    out[*d] = parse_field(f[1], path, no);
  }
  return out;
}

DayRange test_days(const DemandSeries& series) {
  const auto parts = split(series);
  return parts.test.range();
}

/// Rethrows with the stage name in front, keeping the category.
template <typename F>
void tagged(const char* stage, F&& body) {
  const std::string tag = std::string("[") + stage + "] ";
  try {
    body();
  } catch (const FormatError& e) {
    throw FormatError(tag + e.what());
  } catch (const DataError& e) {
    throw DataError(tag + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const FitError& e) {
    throw FitError(tag + e.what());
  } catch (const TrainingError& e) {
    throw TrainingError(tag + e.what());
  } catch (const fs::filesystem_error& e) {
    throw DataError(tag + e.what());
  }
}

}  // namespace

// ---- config ----------------------------------------------------------------

fs::path RunConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

RunConfig RunConfig::parse(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"seed", "output", "data", "interval_minutes", "period_start", "stations", "models", "training",
                 "forecast", "penalties", "queue", "bias_study"},
             "config");
  RunConfig c;
  c.base_dir = base_dir;
  if (!j.contains("seed")) throw ConfigError("config must set a seed");
  read_opt(j, "seed", c.seed, "config");
  std::string out = c.out.string();
  read_opt(j, "output", out, "config");
  c.out = out;
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, {"synthetic", "trips", "weather", "stations"}, "data");
    read_opt(d, "synthetic", c.synthetic, "data");
    std::string t, w, s;
    read_opt(d, "trips", t, "data");
    read_opt(d, "weather", w, "data");
    read_opt(d, "stations", s, "data");
    c.trips = t;
    c.weather = w;
    c.stations = s;
  }
  read_opt(j, "interval_minutes", c.interval_minutes, "config");
  if (j.contains("period_start")) {
    std::string p;
    read_opt(j, "period_start", p, "config");
    const auto d = parse_date(p);
    if (!d) throw ConfigError("period_start must be YYYY-MM-DD");
    c.period_start = *d;
  }
  if (j.contains("stations")) {
    const auto& s = j["stations"];
    check_keys(s, {"ids", "top_n"}, "stations");
    read_opt(s, "ids", c.station_ids, "stations");
    read_opt(s, "top_n", c.top_n, "stations");
  }
  c.models = {"HA", "MA", "LR", "P-RNN", "VP-RNN", "MOVP-RNN"};
  read_opt(j, "models", c.models, "config");
  if (j.contains("training")) {
    const auto& t = j["training"];
    check_keys(t, {"hidden", "learning_rate", "max_epochs", "patience", "batch_days", "clip_norm", "elbo_samples",
                   "carry_state"},
               "training");
    read_opt(t, "hidden", c.train.hidden, "training");
    read_opt(t, "learning_rate", c.train.learning_rate, "training");
    read_opt(t, "max_epochs", c.train.max_epochs, "training");
    read_opt(t, "patience", c.train.patience, "training");
    read_opt(t, "batch_days", c.train.batch_days, "training");
    read_opt(t, "clip_norm", c.train.clip_norm, "training");
    read_opt(t, "elbo_samples", c.train.elbo_samples, "training");
    read_opt(t, "carry_state", c.train.carry_state, "training");
  }
  if (j.contains("forecast")) {
    const auto& f = j["forecast"];
    check_keys(f, {"ma_window_days", "predict_samples", "is_samples"}, "forecast");
    read_opt(f, "ma_window_days", c.ma_window_days, "forecast");
    read_opt(f, "predict_samples", c.predict_samples, "forecast");
    read_opt(f, "is_samples", c.is_samples, "forecast");
  }
  if (j.contains("penalties")) {
    const auto& p = j["penalties"];
    check_keys(p, {"lost_pickup", "lost_return"}, "penalties");
    read_opt(p, "lost_pickup", c.penalties.lost_pickup, "penalties");
    read_opt(p, "lost_return", c.penalties.lost_return, "penalties");
  }
  if (j.contains("queue")) {
    const auto& q = j["queue"];
    check_keys(q, {"substeps_per_interval"}, "queue");
    read_opt(q, "substeps_per_interval", c.transient.substeps_per_interval, "queue");
  }
  if (j.contains("bias_study")) {
    const auto& b = j["bias_study"];
    check_keys(b, {"delta_max", "delta_step"}, "bias_study");
    read_opt(b, "delta_max", c.bias_delta_max, "bias_study");
    read_opt(b, "delta_step", c.bias_delta_step, "bias_study");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void RunConfig::validate() const {
  try {
    validate_interval(interval_minutes);
  } catch (const ConfigError&) {
    throw ConfigError("interval_minutes must be 15, 30 or 60 (got " + std::to_string(interval_minutes) + ")");
  }
  if (!synthetic && (trips.empty() || weather.empty() || stations.empty()))
    throw ConfigError("data.trips, data.weather and data.stations are required unless data.synthetic is set");
  if (station_ids.empty() && top_n < 1) throw ConfigError("stations.top_n must be positive");
  if (models.empty()) throw ConfigError("models must not be empty");
  for (const auto& m : models) {
    bool ok = false;
    for (const auto& k : known_models()) ok = ok || k == m;
    if (!ok) throw ConfigError("unknown model '" + m + "'");
  }
  if (train.hidden < 1 || train.max_epochs < 1 || train.patience < 1 || train.batch_days < 1 ||
      train.elbo_samples < 1 || !(train.learning_rate > 0.0))
    throw ConfigError("training hyperparameters must be positive");
  if (ma_window_days < 1 || predict_samples < 1 || is_samples < 1)
    throw ConfigError("forecast settings must be positive");
  if (!(penalties.lost_pickup >= 0.0) || !(penalties.lost_return >= 0.0))
    throw ConfigError("penalties must be non-negative");
  if (transient.substeps_per_interval < 1) throw ConfigError("queue.substeps_per_interval must be positive");
  if (!(bias_delta_step > 0.0) || !(bias_delta_max >= 0.0)) throw ConfigError("bias_study grid is invalid");
}

std::string RunConfig::canonical() const {
  ordered_json j;
  j["seed"] = seed;
  j["data"] = {{"synthetic", synthetic}, {"trips", trips.generic_string()}, {"weather", weather.generic_string()},
               {"stations", stations.generic_string()}};
  j["interval_minutes"] = interval_minutes;
  j["period_start"] = format_date(period_start);
  j["stations"] = {{"ids", station_ids}, {"top_n", top_n}};
  j["models"] = models;
  j["training"] = {{"hidden", train.hidden},         {"learning_rate", train.learning_rate},
                   {"max_epochs", train.max_epochs}, {"patience", train.patience},
                   {"batch_days", train.batch_days}, {"clip_norm", train.clip_norm},
                   {"elbo_samples", train.elbo_samples}, {"carry_state", train.carry_state}};
  j["forecast"] = {{"ma_window_days", ma_window_days}, {"predict_samples", predict_samples}, {"is_samples", is_samples}};
  j["penalties"] = {{"lost_pickup", penalties.lost_pickup}, {"lost_return", penalties.lost_return}};
  j["queue"] = {{"substeps_per_interval", transient.substeps_per_interval}};
  j["bias_study"] = {{"delta_max", bias_delta_max}, {"delta_step", bias_delta_step}};
  return j.dump();
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

std::uint64_t derive_seed(std::uint64_t seed, const std::string& label) {
  return fnv1a64(std::to_string(seed) + "/" + label);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const DataError*>(&e)) return 2;
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const FitError*>(&e) ||
      dynamic_cast<const TrainingError*>(&e))
    return 3;
  return 2;
}

// ---- stages ----------------------------------------------------------------

void cmd_ingest(const RunConfig& c) {
  tagged("ingest", [&] {
    fs::path trips_path = c.resolve(c.trips), weather_path = c.resolve(c.weather), stations_path = c.resolve(c.stations);
    if (c.synthetic) {
      const auto dir = c.out / "synthetic";
      const auto corpus = generate_corpus(SyntheticOptions{static_cast<int>(std::chrono::year_month_day(c.period_start).year())},
                                          derive_seed(c.seed, "synthetic"));
      trips_path = dir / "trips.csv";
      weather_path = dir / "weather.csv";
      stations_path = dir / "stations.csv";
      auto t = open_out(trips_path);
      write_trips_csv(t, corpus.trips);
      auto w = open_out(weather_path);
      write_weather_csv(w, corpus.weather);
      auto s = open_out(stations_path);
      write_stations_csv(s, corpus.stations);
    }
    std::ifstream trips_in(trips_path, std::ios::binary);
    if (!trips_in) throw DataError("cannot open trips file " + trips_path.string());
    std::ifstream weather_in(weather_path, std::ios::binary);
    if (!weather_in) throw DataError("cannot open weather file " + weather_path.string());
    std::ifstream stations_in(stations_path, std::ios::binary);
    if (!stations_in) throw DataError("cannot open station file " + stations_path.string());

    StationFilter filter;
    if (!c.station_ids.empty()) filter = std::set<StationId>(c.station_ids.begin(), c.station_ids.end());
    const auto parsed = parse_trips(trips_in, filter);
    for (const auto& e : parsed.errors)
      std::cerr << "warning: " << trips_path.string() << " line " << e.line << ": " << e.message << "\n";
    {
      auto out = open_out(c.out / "reports" / "ingest_errors.csv");
      out << provenance(c) << "line,message\n";
      for (const auto& e : parsed.errors) out << e.line << ",\"" << e.message << "\"\n";
    }
    const auto weather = parse_weather(weather_in);
    const auto capacities = read_stations_csv(stations_in);

    const auto selected = c.station_ids.empty() ? top_stations(parsed.trips, static_cast<std::size_t>(c.top_n))
                                                : c.station_ids;
    if (selected.empty()) throw DataError("no stations selected; the trips file has no usable rows");
    const DayRange range{c.period_start,
                         static_cast<int>((add_months(c.period_start, 12) - c.period_start).count())};
    const auto covariates = build_covariates(weather, range, c.interval_minutes);
    const auto streams = to_event_streams(parsed.trips);

    std::vector<StationInfo> chosen;
    for (const auto& id : selected) {
      const auto cap = std::find_if(capacities.begin(), capacities.end(), [&](const StationInfo& s) { return s.id == id; });
      if (cap == capacities.end()) throw DataError("station " + id + " has no capacity in " + stations_path.string());
      chosen.push_back(*cap);
      EventStream events{id, {}};
      if (const auto it = streams.find(id); it != streams.end())
        for (const auto& e : it->second.events)
          if (range.contains(date_of(e.time))) events.events.push_back(e);
      auto series = aggregate(events, c.interval_minutes, range);
      series.covariates = covariates;
      series.validate();
      auto d = open_out(demand_path(c, id));
      d << provenance(c);
      write_demand_csv(d, series);
      auto e = open_out(events_path(c, id));
      e << provenance(c);
      write_events_csv(e, events);
    }
    auto s = open_out(selection_path(c));
    s << provenance(c);
    write_stations_csv(s, chosen);
  });
}

void cmd_train(const RunConfig& c) {
  tagged("train", [&] {
    for (const auto& st : read_selection(c)) {
      const auto series = load_demand(c, st.id);
      const auto parts = split(series);
      const auto dir = model_dir(c, st.id);
      fs::create_directories(dir);
      for (const auto& m : c.models) {
        if (m == "HA" || m == "LR") {
          // Classical fits use all pre-test months.
          const auto fit_data = series.days(0, parts.train.n_days() + parts.validation.n_days());
          write_text(dir / (file_stem(m) + ".json"),
                     stamped_json(c, m == "HA" ? to_json(fit_ha(fit_data)) : to_json(fit_lr(fit_data))));
          continue;
        }
        if (!is_neural(m)) continue;
        const auto kind = m == "P-RNN" ? ModelKind::PRnn : m == "VP-RNN" ? ModelKind::VpRnn : ModelKind::MovpRnn;
        std::vector<std::pair<Target, std::string>> jobs;
        if (kind == ModelKind::MovpRnn)
          jobs = {{Target::Both, "movprnn"}};
        else
          jobs = {{Target::Pickups, file_stem(m) + "_pickups"}, {Target::Returns, file_stem(m) + "_returns"}};
        for (const auto& [target, stem] : jobs) {
          const auto seed = derive_seed(c.seed, "train/" + st.id + "/" + stem);
          const auto trained = train(kind, target, parts.train, parts.validation, c.train, seed);
          CheckpointMeta meta{seed, c.hash(), c.train, trained.report.best_epoch};
          save_checkpoint_file((dir / (stem + ".ckpt")).string(), trained.model, meta);
          auto log = open_out(dir / (stem + "_training.csv"));
          log << provenance(c) << "epoch,train_loss,validation_loss\n";
          for (std::size_t e = 0; e < trained.report.train_loss.size(); ++e)
            log << e << ',' << csv::format_double(trained.report.train_loss[e]) << ','
                << csv::format_double(trained.report.validation_loss[e]) << '\n';
        }
      }
    }
  });
}

void cmd_forecast(const RunConfig& c) {
  tagged("forecast", [&] {
    for (const auto& st : read_selection(c)) {
      const auto series = load_demand(c, st.id);
      const auto days = test_days(series);
      for (const auto& m : c.models) {
        const auto model = load_forecaster(c, st.id, m);
        auto out = open_out(forecast_path(c, st.id, m));
        out << provenance(c) << "date,interval,pickups,returns\n";
        std::ostringstream ll;
        bool has_ll = false;
        for (int d = 0; d < days.n_days; ++d) {
          const Date date = days.first + std::chrono::days{d};
          const ForecastContext ctx{&series, date};
          const auto rates = model->forecast(ctx);
          rates.validate();
          for (Eigen::Index k = 0; k < rates.size(); ++k)
            out << format_date(date) << ',' << k << ',' << csv::format_double(rates.pickups[k]) << ','
                << csv::format_double(rates.returns[k]) << '\n';
          if (const auto v = model->log_likelihood(ctx)) {
            has_ll = true;
            ll << format_date(date) << ',' << csv::format_double(*v) << '\n';
          }
        }
        if (has_ll) {
          auto l = open_out(loglik_path(c, st.id, m));
          l << provenance(c) << "date,log_likelihood\n" << ll.str();
        }
      }
    }
  });
}

void cmd_optimize(const RunConfig& c) {
  tagged("optimize", [&] {
    for (const auto& st : read_selection(c)) {
      for (const auto& m : c.models) {
        const auto forecasts = read_forecasts(c, st.id, m);
        auto out = open_out(decision_path(c, st.id, m));
        out << provenance(c) << "date,capacity,s_star,udf_min\n";
        for (const auto& [date, rates] : forecasts) {
          const auto curve = udf_curve(rates, st.capacity, c.penalties, c.transient);
          out << format_date(date) << ',' << st.capacity << ',' << curve.s_star << ','
              << csv::format_double(curve.values[curve.s_star]) << '\n';
        }
      }
    }
  });
}

void cmd_evaluate(const RunConfig& c) {
  tagged("evaluate", [&] {
    const auto stations = read_selection(c);
    std::vector<DemandSeries> series;
    std::vector<EventStream> events;
    series.reserve(stations.size());
    events.reserve(stations.size());
    std::vector<StationCase> cases;
    for (const auto& st : stations) {
      series.push_back(load_demand(c, st.id));
      events.push_back(load_events(c, st.id));
    }
    for (std::size_t i = 0; i < stations.size(); ++i) {
      StationCase sc{stations[i].id, &series[i], &events[i], stations[i].capacity, test_days(series[i]), {}};
      for (const auto& m : c.models)
        sc.models.push_back(std::make_shared<StoredForecaster>(m, read_forecasts(c, sc.station, m),
                                                               read_loglik(c, sc.station, m)));
      cases.push_back(std::move(sc));
    }
    BenchmarkOptions opt;
    opt.penalties = c.penalties;
    opt.transient = c.transient;
    const auto result = benchmark(cases, opt);
    auto lng = open_out(c.out / "reports" / "metrics_long.csv");
    lng << provenance(c);
    write_metrics_long_csv(lng, result);
    auto sum = open_out(c.out / "reports" / "decision_summary.csv");
    sum << provenance(c);
    write_decision_summary_csv(sum, result);
    write_text(c.out / "reports" / "summary.json", stamped_json(c, summary_json(result)));
  });
}

void cmd_bias_study(const RunConfig& c) {
  tagged("bias-study", [&] {
    const auto peaked = peaked_synthetic_day(derive_seed(c.seed, "bias/peaked-day"));
    std::vector<double> grid;
    const auto steps = static_cast<int>(std::floor(c.bias_delta_max / c.bias_delta_step + 1e-9));
    for (int i = 0; i <= steps; ++i) grid.push_back(c.bias_delta_step * i);
    const auto study = bias_study(peaked.day, peaked.events, peaked.capacity, c.penalties, grid, c.transient);
    auto out = open_out(c.out / "bias" / "bias_curves.csv");
    out << provenance(c);
    write_bias_csv(out, study);
    auto day = open_out(c.out / "bias" / "peaked_day.csv");
    day << provenance(c) << "interval,pickups,returns\n";
    for (Eigen::Index k = 0; k < peaked.day.size(); ++k)
      day << k << ',' << peaked.day.pickups[k] << ',' << peaked.day.returns[k] << '\n';
    auto ev = open_out(c.out / "bias" / "peaked_day_events.csv");
    ev << provenance(c);
    write_events_csv(ev, peaked.events);
    ordered_json j;
    j["capacity"] = peaked.capacity;
    j["oracle_s_star"] = study.oracle_s_star;
    j["oracle_cost"] = study.oracle_cost;
    write_text(c.out / "bias" / "oracle.json", stamped_json(c, j.dump()));
  });
}

void run_pipeline(const RunConfig& c) {
  cmd_ingest(c);
  cmd_train(c);
  cmd_forecast(c);
  cmd_optimize(c);
  cmd_evaluate(c);
  cmd_bias_study(c);
}

}  // namespace bikeinv
