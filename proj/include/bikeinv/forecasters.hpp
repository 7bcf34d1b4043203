#ifndef BIKEINV_FORECASTERS_HPP
#define BIKEINV_FORECASTERS_HPP

#include <memory>
#include <optional>
#include <string>

#include "bikeinv/classical.hpp"
#include "bikeinv/recurrent.hpp"

namespace bikeinv {

/// What a forecaster may see for one target day. `series` holds the whole
/// station history including the day itself; only the oracle reads counts on
/// or after `date`.
struct ForecastContext {
  const DemandSeries* series = nullptr;
  Date date;

  DemandSeries day() const { return series->day(date); }
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  virtual RateSeries forecast(const ForecastContext& ctx) const = 0;
  /// Held-out log-likelihood of the day's counts where the model defines one.
  virtual std::optional<double> log_likelihood(const ForecastContext&) const { return std::nullopt; }
};

class HistoricalAverage final : public Forecaster {
 public:
  explicit HistoricalAverage(SeasonalProfile profile) : profile_(std::move(profile)) {}
  std::string name() const override { return "HA"; }
  RateSeries forecast(const ForecastContext& ctx) const override;

 private:
  SeasonalProfile profile_;
};

/// Refits the seasonal average on the window of days before each target day.
class MovingAverage final : public Forecaster {
 public:
  explicit MovingAverage(int window_days = 30) : window_(window_days) {}
  std::string name() const override { return "MA"; }
  RateSeries forecast(const ForecastContext& ctx) const override;

 private:
  int window_;
};

class LinearRegression final : public Forecaster {
 public:
  explicit LinearRegression(LinearModel model) : model_(std::move(model)) {}
  std::string name() const override { return "LR"; }
  RateSeries forecast(const ForecastContext& ctx) const override;

 private:
  LinearModel model_;
};

/// Either one two-output model or a pickup model and a return model.
class RecurrentForecaster final : public Forecaster {
 public:
  RecurrentForecaster(std::string name, std::shared_ptr<const RecurrentRateModel> joint,
                      PredictOptions options = {});
  RecurrentForecaster(std::string name, std::shared_ptr<const RecurrentRateModel> pickups,
                      std::shared_ptr<const RecurrentRateModel> returns, PredictOptions options = {});

  std::string name() const override { return name_; }
  RateSeries forecast(const ForecastContext& ctx) const override;
  /// Importance-sampled (exact for the P-RNN), summed over both processes.
  std::optional<double> log_likelihood(const ForecastContext& ctx) const override;

  int is_samples = 30;

 private:
  std::string name_;
  std::shared_ptr<const RecurrentRateModel> first_, second_;
  PredictOptions options_;
};

/// Perfect information: the day's realized counts.
class Oracle final : public Forecaster {
 public:
  std::string name() const override { return "Oracle"; }
  RateSeries forecast(const ForecastContext& ctx) const override;
};

}  // namespace bikeinv

#endif  // BIKEINV_FORECASTERS_HPP
