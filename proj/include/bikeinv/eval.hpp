#ifndef BIKEINV_EVAL_HPP
#define BIKEINV_EVAL_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bikeinv/forecasters.hpp"
#include "bikeinv/ingest.hpp"
#include "bikeinv/inventory.hpp"

namespace bikeinv {

struct PredictionReport {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> r_squared;  // missing when the actuals are constant
  std::optional<double> log_likelihood;
};

/// Throws DomainError unless lengths match and are at least 2.
PredictionReport point_metrics(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

struct LostSalesReport {
  StationId station;
  Date date;
  int starting_inventory = 0;
  long long lost_pickups = 0;
  long long lost_returns = 0;
  long long served_pickups = 0;
  long long served_returns = 0;
  double cost = 0.0;
};

enum class TieOrder { PickupFirst, ReturnFirst };

/// Replays the events in time order from inventory s. A pickup at 0 and a
/// return at C are lost and leave the inventory unchanged.
LostSalesReport replay_cost(const EventStream& day, int s, int capacity, const PenaltyConfig& penalties,
                            TieOrder ties = TieOrder::PickupFirst);
LostSalesReport replay_cost(std::span<const EventKind> ordered, int s, int capacity,
                            const PenaltyConfig& penalties);

/// (model - oracle) / oracle; missing when oracle_cost <= 0.
std::optional<double> rpd(double model_cost, double oracle_cost);

/// | sum_t (mu_t - lambda_t) - (mu_hat_t - lambda_hat_t) |
double cumulative_error(const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda, const Eigen::VectorXd& mu_hat,
                        const Eigen::VectorXd& lambda_hat);

/// One station's test period and the models competing on it. Every station
/// should offer models under the same names.
struct StationCase {
  StationId station;
  const DemandSeries* series = nullptr;  // full history with covariates
  const EventStream* events = nullptr;
  int capacity = 0;
  DayRange test_days;
  std::vector<std::shared_ptr<const Forecaster>> models;
};

struct DayRecord {
  StationId station;
  Date date;
  std::string model;
  int s_star = 0;
  LostSalesReport replay;
  double ce = 0.0;
  PredictionReport pickups;
  PredictionReport returns;
};

struct DecisionSummary {
  std::string model;
  double mean_cost = 0.0;
  std::optional<double> rpd;
  double mean_ce = 0.0;
  // Pooled over every test interval of every station.
  double rmse_pickups = 0.0, mae_pickups = 0.0;
  double rmse_returns = 0.0, mae_returns = 0.0;
  std::optional<double> mean_log_likelihood;  // per station-day
  std::size_t n_days = 0;
};

struct BenchmarkResult {
  std::vector<DayRecord> days;
  std::vector<DecisionSummary> summaries;  // model order of first appearance
  double oracle_mean_cost = 0.0;
};

struct BenchmarkOptions {
  PenaltyConfig penalties;
  TransientOptions transient;
  TieOrder ties = TieOrder::PickupFirst;
  bool log_likelihood = true;
};

/// Per test day and model: forecast, s* = argmin UDF, replay the realized
/// events. The oracle (realized counts as rates) is always evaluated for the
/// RPD baseline.
BenchmarkResult benchmark(std::span<const StationCase> cases, const BenchmarkOptions& options);

/// Long format: station, date, model, metric, value.
void write_metrics_long_csv(std::ostream& out, const BenchmarkResult& result);
/// model, n_days, mean_cost, rpd, mean_ce, rmse/mae per process, mean_log_likelihood.
void write_decision_summary_csv(std::ostream& out, const BenchmarkResult& result);
std::string summary_json(const BenchmarkResult& result);

}  // namespace bikeinv

#endif  // BIKEINV_EVAL_HPP
