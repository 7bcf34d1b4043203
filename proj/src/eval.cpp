#include "bikeinv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <json.hpp>

#include "bikeinv/csv.hpp"

namespace bikeinv {

PredictionReport point_metrics(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
  if (actual.size() != predicted.size()) throw DomainError("point_metrics: length mismatch");
  if (actual.size() < 2) throw DomainError("point_metrics: need at least two points");
  const Eigen::ArrayXd err = (actual - predicted).array();
  const double n = static_cast<double>(actual.size());
  PredictionReport r;
  r.rmse = std::sqrt(err.square().sum() / n);
  r.mae = err.abs().sum() / n;
  const double sst = (actual.array() - actual.mean()).square().sum();
  if (sst > 0.0) r.r_squared = 1.0 - err.square().sum() / sst;
  return r;
}

LostSalesReport replay_cost(std::span<const EventKind> ordered, int s, int capacity,
                            const PenaltyConfig& penalties) {
  if (capacity < 1 || s < 0 || s > capacity) throw DomainError("replay needs 0 <= s <= C and C >= 1");
  LostSalesReport r;
  r.starting_inventory = s;
  int level = s;
  for (const auto kind : ordered) {
    if (kind == EventKind::Pickup) {
      if (level == 0) {
        ++r.lost_pickups;
      } else {
        --level;
        ++r.served_pickups;
      }
    } else if (level == capacity) {
      ++r.lost_returns;
    } else {
      ++level;
      ++r.served_returns;
    }
  }
  r.cost = penalties.lost_pickup * static_cast<double>(r.lost_pickups) +
           penalties.lost_return * static_cast<double>(r.lost_returns);
  return r;
}

LostSalesReport replay_cost(const EventStream& day, int s, int capacity, const PenaltyConfig& penalties,
                            TieOrder ties) {
  auto events = day.events;
  if (ties == TieOrder::PickupFirst)
    std::stable_sort(events.begin(), events.end(), event_before);
  else
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      return a.time != b.time ? a.time < b.time : a.kind > b.kind;
    });
  std::vector<EventKind> kinds;
  kinds.reserve(events.size());
  for (const auto& e : events) kinds.push_back(e.kind);
  auto r = replay_cost(kinds, s, capacity, penalties);
  r.station = day.station;
  if (!events.empty()) r.date = date_of(events.front().time);
  return r;
}

std::optional<double> rpd(double model_cost, double oracle_cost) {
  if (!(oracle_cost > 0.0)) return std::nullopt;
  return (model_cost - oracle_cost) / oracle_cost;
}

double cumulative_error(const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu_hat,
                        const Eigen::VectorXd& lambda_hat) {
  const auto n = mu.size();
  if (lambda.size() != n || mu_hat.size() != n || lambda_hat.size() != n)
    throw DomainError("cumulative_error: length mismatch");
  return std::abs(((mu - lambda) - (mu_hat - lambda_hat)).sum());
}

namespace {

struct Accumulator {
  double cost = 0.0, ce = 0.0;
  double sq_p = 0.0, abs_p = 0.0, sq_r = 0.0, abs_r = 0.0;
  double ll = 0.0;
  std::size_t ll_days = 0;
  std::size_t days = 0;
  std::size_t intervals = 0;
};

DayRecord evaluate_day(const StationCase& c, const Forecaster& model, const DemandSeries& day,
                       const EventStream& events, const RateSeries& rates, const BenchmarkOptions& options) {
  DayRecord rec;
  rec.station = c.station;
  rec.date = day.first_day;
  rec.model = model.name();
  rec.s_star = udf_curve(rates, c.capacity, options.penalties, options.transient).s_star;
  rec.replay = replay_cost(events, rec.s_star, c.capacity, options.penalties, options.ties);
  rec.replay.station = c.station;
  rec.replay.date = day.first_day;
  const Eigen::VectorXd mu = day.pickups.cast<double>();
  const Eigen::VectorXd lambda = day.returns.cast<double>();
  rec.ce = cumulative_error(mu, lambda, rates.pickups, rates.returns);
  rec.pickups = point_metrics(mu, rates.pickups);
  rec.returns = point_metrics(lambda, rates.returns);
  return rec;
}

void accumulate(Accumulator& acc, const DayRecord& rec, const DemandSeries& day, const RateSeries& rates) {
  acc.cost += rec.replay.cost;
  acc.ce += rec.ce;
  acc.sq_p += (day.pickups.cast<double>() - rates.pickups).squaredNorm();
  acc.abs_p += (day.pickups.cast<double>() - rates.pickups).cwiseAbs().sum();
  acc.sq_r += (day.returns.cast<double>() - rates.returns).squaredNorm();
  acc.abs_r += (day.returns.cast<double>() - rates.returns).cwiseAbs().sum();
  if (rec.pickups.log_likelihood) {
    acc.ll += *rec.pickups.log_likelihood;
    ++acc.ll_days;
  }
  ++acc.days;
  acc.intervals += static_cast<std::size_t>(day.size());
}

}  // namespace

BenchmarkResult benchmark(std::span<const StationCase> cases, const BenchmarkOptions& options) {
  options.penalties.validate();
  BenchmarkResult result;
  std::vector<std::string> order;
  std::map<std::string, Accumulator> totals;
  double oracle_total = 0.0;
  std::size_t oracle_days = 0;
  const Oracle oracle;
  for (const auto& c : cases) {
    if (!c.series || !c.events) throw std::invalid_argument("benchmark: station case is incomplete");
    for (int d = 0; d < c.test_days.n_days; ++d) {
      const Date date = c.test_days.first + std::chrono::days{d};
      const ForecastContext ctx{c.series, date};
      const DemandSeries day = c.series->day(date);
      const EventStream events = c.events->day(date);
      const auto oracle_rates = oracle.forecast(ctx);
      oracle_total += evaluate_day(c, oracle, day, events, oracle_rates, options).replay.cost;
      ++oracle_days;
      for (const auto& model : c.models) {
        const auto rates = model->forecast(ctx);
        auto rec = evaluate_day(c, *model, day, events, rates, options);
        // The joint log-likelihood is stored on the pickup report.
        if (options.log_likelihood) rec.pickups.log_likelihood = model->log_likelihood(ctx);
        auto [it, inserted] = totals.try_emplace(rec.model);
        if (inserted) order.push_back(rec.model);
        accumulate(it->second, rec, day, rates);
        result.days.push_back(std::move(rec));
      }
    }
  }
  result.oracle_mean_cost = oracle_days ? oracle_total / static_cast<double>(oracle_days) : 0.0;
  for (const auto& name : order) {
    const auto& a = totals.at(name);
    DecisionSummary s;
    s.model = name;
    s.n_days = a.days;
    const double days = static_cast<double>(a.days);
    const double n = static_cast<double>(a.intervals);
    s.mean_cost = a.cost / days;
    s.rpd = rpd(s.mean_cost, result.oracle_mean_cost);
    s.mean_ce = a.ce / days;
    s.rmse_pickups = std::sqrt(a.sq_p / n);
    s.mae_pickups = a.abs_p / n;
    s.rmse_returns = std::sqrt(a.sq_r / n);
    s.mae_returns = a.abs_r / n;
    if (a.ll_days > 0) s.mean_log_likelihood = a.ll / static_cast<double>(a.ll_days);
    result.summaries.push_back(std::move(s));
  }
  return result;
}

void write_metrics_long_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "station,date,model,metric,value\n";
  for (const auto& r : result.days) {
    const std::string prefix = r.station + "," + format_date(r.date) + "," + r.model + ",";
    auto row = [&](const char* metric, double v) { out << prefix << metric << ',' << csv::format_double(v) << '\n'; };
    row("s_star", r.s_star);
    row("cost", r.replay.cost);
    row("lost_pickups", static_cast<double>(r.replay.lost_pickups));
    row("lost_returns", static_cast<double>(r.replay.lost_returns));
    row("ce", r.ce);
    row("rmse_pickups", r.pickups.rmse);
    row("mae_pickups", r.pickups.mae);
    if (r.pickups.r_squared) row("r2_pickups", *r.pickups.r_squared);
    row("rmse_returns", r.returns.rmse);
    row("mae_returns", r.returns.mae);
    if (r.returns.r_squared) row("r2_returns", *r.returns.r_squared);
    if (r.pickups.log_likelihood) row("log_likelihood", *r.pickups.log_likelihood);
  }
}

void write_decision_summary_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "model,n_days,mean_cost,rpd,mean_ce,rmse_pickups,mae_pickups,rmse_returns,mae_returns,mean_log_likelihood\n";
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& s : result.summaries)
    out << s.model << ',' << s.n_days << ',' << csv::format_double(s.mean_cost) << ',' << opt(s.rpd) << ','
        << csv::format_double(s.mean_ce) << ',' << csv::format_double(s.rmse_pickups) << ','
        << csv::format_double(s.mae_pickups) << ',' << csv::format_double(s.rmse_returns) << ','
        << csv::format_double(s.mae_returns) << ',' << opt(s.mean_log_likelihood) << '\n';
}

std::string summary_json(const BenchmarkResult& result) {
  nlohmann::ordered_json j;
  j["oracle_mean_cost"] = result.oracle_mean_cost;
  auto models = nlohmann::ordered_json::array();
  for (const auto& s : result.summaries) {
    nlohmann::ordered_json m;
    m["model"] = s.model;
    m["n_days"] = s.n_days;
    m["mean_cost"] = s.mean_cost;
    m["rpd"] = s.rpd ? nlohmann::ordered_json(*s.rpd) : nlohmann::ordered_json(nullptr);
    m["mean_ce"] = s.mean_ce;
    m["rmse_pickups"] = s.rmse_pickups;
    m["mae_pickups"] = s.mae_pickups;
    m["rmse_returns"] = s.rmse_returns;
    m["mae_returns"] = s.mae_returns;
    m["mean_log_likelihood"] =
        s.mean_log_likelihood ? nlohmann::ordered_json(*s.mean_log_likelihood) : nlohmann::ordered_json(nullptr);
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  return j.dump(2) + "\n";
}

}  // namespace bikeinv
