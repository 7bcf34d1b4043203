#ifndef BIKEINV_CLASSICAL_HPP
#define BIKEINV_CLASSICAL_HPP

#include <Eigen/Dense>

#include <string>

#include "bikeinv/ingest.hpp"
#include "bikeinv/queueing.hpp"

namespace bikeinv {

/// Mean count per (day-of-week, time-of-day) cell, 7 x slots per process.
struct SeasonalProfile {
  int interval_minutes = 60;
  Eigen::MatrixXd pickups;
  Eigen::MatrixXd returns;
};

/// Historical average over the whole series. Cells never observed are 0.
SeasonalProfile fit_ha(const DemandSeries& train);

/// Historical average restricted to the days in [as_of - window_days, as_of).
SeasonalProfile fit_ma(const DemandSeries& history, Date as_of, int window_days = 30);

RateSeries predict(const SeasonalProfile& profile, Date day);

/// OLS weights [intercept, one per covariate column] for each process. The
/// first column of each one-hot block is dropped from the design and carries
/// a zero weight.
struct LinearModel {
  int interval_minutes = 60;
  Eigen::VectorXd pickup_coefficients;
  Eigen::VectorXd return_coefficients;
};

/// Throws FitError when the reduced design is rank deficient.
LinearModel fit_lr(const DemandSeries& train);

/// Affine prediction clamped at zero.
RateSeries predict(const LinearModel& model, const CovariateMatrix& day);

/// Columns kept in the OLS design, in order, excluding the intercept.
std::vector<int> lr_design_columns(const CovariateLayout& layout);

std::string to_json(const SeasonalProfile& profile);
std::string to_json(const LinearModel& model);
SeasonalProfile seasonal_profile_from_json(const std::string& text);
LinearModel linear_model_from_json(const std::string& text);

}  // namespace bikeinv

#endif  // BIKEINV_CLASSICAL_HPP
