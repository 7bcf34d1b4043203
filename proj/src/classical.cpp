#include "bikeinv/classical.hpp"

#include <json.hpp>

namespace bikeinv {

namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != m) throw FormatError("ragged matrix in model JSON");
    for (Eigen::Index c = 0; c < m; ++c) out(r, c) = rows[r][c].get<double>();
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

SeasonalProfile fit_ha(const DemandSeries& train) {
  if (train.size() == 0) throw DataError(train.station + ": cannot fit a historical average on no data");
  const int slots = train.slots();
  Eigen::MatrixXd sum_p = Eigen::MatrixXd::Zero(7, slots);
  Eigen::MatrixXd sum_r = Eigen::MatrixXd::Zero(7, slots);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(7, slots);
  for (int d = 0; d < train.n_days(); ++d) {
    const int dow = day_of_week(train.first_day + std::chrono::days{d});
    for (int s = 0; s < slots; ++s) {
      const Eigen::Index t = static_cast<Eigen::Index>(d) * slots + s;
      sum_p(dow, s) += train.pickups[t];
      sum_r(dow, s) += train.returns[t];
      n(dow, s) += 1.0;
    }
  }
  const Eigen::MatrixXd denom = n.cwiseMax(1.0);
  return {train.interval_minutes, sum_p.cwiseQuotient(denom), sum_r.cwiseQuotient(denom)};
}

SeasonalProfile fit_ma(const DemandSeries& history, Date as_of, int window_days) {
  const Date lo = std::max(history.first_day, as_of - std::chrono::days{window_days});
  const Date hi = std::min(history.range().end(), as_of);
  if (hi <= lo) throw DataError(history.station + ": moving-average window before " +
                                format_date(as_of) + " holds no data");
  const int offset = static_cast<int>((lo - history.first_day).count());
  return fit_ha(history.days(offset, static_cast<int>((hi - lo).count())));
}

RateSeries predict(const SeasonalProfile& profile, Date day) {
  const int dow = day_of_week(day);
  return {profile.interval_minutes, profile.pickups.row(dow).transpose(),
          profile.returns.row(dow).transpose()};
}

std::vector<int> lr_design_columns(const CovariateLayout& layout) {
  std::vector<int> cols{CovariateLayout::temperature, CovariateLayout::rain_probability};
  for (int d = 1; d < 7; ++d) cols.push_back(CovariateLayout::day_of_week_offset + d);
  for (int s = 1; s < layout.slots(); ++s) cols.push_back(CovariateLayout::time_of_day_offset + s);
  return cols;
}

LinearModel fit_lr(const DemandSeries& train) {
  const auto& cov = train.covariates;
  if (cov.rows() == 0 || cov.rows() != train.size())
    throw FitError(train.station + ": linear regression needs aligned covariates");
  const auto layout = cov.layout();
  const auto cols = lr_design_columns(layout);
  Eigen::MatrixXd design(cov.rows(), static_cast<Eigen::Index>(cols.size()) + 1);
  design.col(0).setOnes();
  for (std::size_t j = 0; j < cols.size(); ++j)
    design.col(static_cast<Eigen::Index>(j) + 1) = cov.values.col(cols[j]);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols())
    throw FitError(train.station + ": design matrix is rank deficient (rank " +
                   std::to_string(qr.rank()) + " of " + std::to_string(design.cols()) + ")");

  auto expand = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(layout.width() + 1);
    full[0] = beta[0];
    for (std::size_t j = 0; j < cols.size(); ++j) full[cols[j] + 1] = beta[static_cast<Eigen::Index>(j) + 1];
    return full;
  };
  return {train.interval_minutes, expand(train.pickups.cast<double>()),
          expand(train.returns.cast<double>())};
}

RateSeries predict(const LinearModel& model, const CovariateMatrix& day) {
  if (day.values.cols() + 1 != model.pickup_coefficients.size())
    throw DomainError("covariate width does not match the linear model");
  auto affine = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    return ((day.values * w.tail(w.size() - 1)).array() + w[0]).cwiseMax(0.0);
  };
  return {model.interval_minutes, affine(model.pickup_coefficients),
          affine(model.return_coefficients)};
}

std::string to_json(const SeasonalProfile& profile) {
  json j;
  j["kind"] = "seasonal_profile";
  j["interval_minutes"] = profile.interval_minutes;
  j["pickups"] = matrix_json(profile.pickups);
  j["returns"] = matrix_json(profile.returns);
  return j.dump();
}

std::string to_json(const LinearModel& model) {
  json j;
  j["kind"] = "linear_model";
  j["interval_minutes"] = model.interval_minutes;
  const auto& p = model.pickup_coefficients;
  const auto& r = model.return_coefficients;
  j["pickup_coefficients"] = std::vector<double>(p.data(), p.data() + p.size());
  j["return_coefficients"] = std::vector<double>(r.data(), r.data() + r.size());
  return j.dump();
}

SeasonalProfile seasonal_profile_from_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.at("kind") != "seasonal_profile") throw FormatError("not a seasonal profile");
  return {j.at("interval_minutes").get<int>(), matrix_from_json(j.at("pickups")),
          matrix_from_json(j.at("returns"))};
}

LinearModel linear_model_from_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.at("kind") != "linear_model") throw FormatError("not a linear model");
  return {j.at("interval_minutes").get<int>(), vector_from_json(j.at("pickup_coefficients")),
          vector_from_json(j.at("return_coefficients"))};
}

}  // namespace bikeinv
