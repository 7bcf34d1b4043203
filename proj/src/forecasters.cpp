#include "bikeinv/forecasters.hpp"

#include "bikeinv/inventory.hpp"

namespace bikeinv {

namespace {

Sequence day_sequence(const RecurrentRateModel& model, const DemandSeries& day) {
  Sequence seq;
  seq.covariates = day.covariates.values;
  const Eigen::Index n = day.size();
  switch (model.target) {
    case Target::Pickups: seq.counts = day.pickups.cast<double>(); break;
    case Target::Returns: seq.counts = day.returns.cast<double>(); break;
    case Target::Both:
      seq.counts.resize(n, 2);
      seq.counts.col(0) = day.pickups.cast<double>();
      seq.counts.col(1) = day.returns.cast<double>();
      break;
  }
  return seq;
}

}  // namespace

RateSeries HistoricalAverage::forecast(const ForecastContext& ctx) const { return predict(profile_, ctx.date); }

RateSeries MovingAverage::forecast(const ForecastContext& ctx) const {
  return predict(fit_ma(*ctx.series, ctx.date, window_), ctx.date);
}

RateSeries LinearRegression::forecast(const ForecastContext& ctx) const {
  return predict(model_, ctx.day().covariates);
}

RecurrentForecaster::RecurrentForecaster(std::string name, std::shared_ptr<const RecurrentRateModel> joint,
                                         PredictOptions options)
    : name_(std::move(name)), first_(std::move(joint)), options_(options) {
  if (!first_ || first_->target != Target::Both) throw std::invalid_argument(name_ + ": joint model must target both");
}

RecurrentForecaster::RecurrentForecaster(std::string name, std::shared_ptr<const RecurrentRateModel> pickups,
                                         std::shared_ptr<const RecurrentRateModel> returns, PredictOptions options)
    : name_(std::move(name)), first_(std::move(pickups)), second_(std::move(returns)), options_(options) {
  if (!first_ || !second_ || first_->target != Target::Pickups || second_->target != Target::Returns)
    throw std::invalid_argument(name_ + ": needs a pickup model and a return model");
}

RateSeries RecurrentForecaster::forecast(const ForecastContext& ctx) const {
  const auto& series = *ctx.series;
  const Eigen::MatrixXd covariates = series.day(ctx.date).covariates.values;
  Eigen::MatrixXd warmup;
  const Date previous = ctx.date - std::chrono::days{1};
  if (series.range().contains(previous)) warmup = series.day(previous).covariates.values;
  const Eigen::MatrixXd* w = warmup.size() > 0 ? &warmup : nullptr;
  RateSeries out{series.interval_minutes, {}, {}};
  const auto a = predict_rates(*first_, covariates, options_, w);
  if (!second_) {
    out.pickups = a.mean.col(0);
    out.returns = a.mean.col(1);
  } else {
    const auto b = predict_rates(*second_, covariates, options_, w);
    out.pickups = a.mean.col(0);
    out.returns = b.mean.col(0);
  }
  return out;
}

std::optional<double> RecurrentForecaster::log_likelihood(const ForecastContext& ctx) const {
  const auto day = ctx.day();
  double total = is_log_likelihood(*first_, day_sequence(*first_, day), is_samples, options_.seed);
  if (second_) total += is_log_likelihood(*second_, day_sequence(*second_, day), is_samples, options_.seed + 1);
  return total;
}

RateSeries Oracle::forecast(const ForecastContext& ctx) const { return counts_as_rates(ctx.day()); }

}  // namespace bikeinv
